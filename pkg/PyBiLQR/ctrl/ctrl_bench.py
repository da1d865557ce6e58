#! encoding = utf-8

""" Iteration-count benchmark of the antilinear solvers """

import sys
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from time import perf_counter
import numpy as np
import pandas as pd

from PyBiLQR.config.config import Prefs, load_problem, parse_options
from PyBiLQR.libs.consts import EXIT_CODE
from PyBiLQR.libs.errors import BiLQRError, InputError
from PyBiLQR.libs.riccati import (SolverOptions, solve_anti_riccati, solve_normal_riccati,
                                  solve_bimatrix_riccati, build_normal_data)
from PyBiLQR.libs.stabilizability import is_stabilizable_antilinear
from PyBiLQR.libs.system import AntilinearSystem, random_antilinear_system, random_weights

logger = logging.getLogger(__name__)

COLUMNS = ('instance', 'n', 'm', 'anti_iters', 'normal_iters', 'bimatrix_iters',
           'anti_residual', 'normal_residual', 'bimatrix_residual', 'wall_time', 'note')

# share of rows with normal_iters <= anti_iters below which a warning is logged
CLAIM_RATE = 0.9


def random_instances(n: int, m: int, count: int, seed: int) -> list:
    """ Seed-fixed list of (name, system, weights) """
    rng = np.random.default_rng(seed)
    return [(f'random_{i:04d}', random_antilinear_system(rng, n, m), random_weights(rng, n, m))
            for i in range(count)]


def directory_instances(path) -> list:
    """ Antilinear problem documents in a directory, sorted by name.
        Documents of other kinds or that fail to parse are kept with a note.
    """
    instances = []
    for filename in sorted(Path(path).glob('*.json')):
        try:
            problem = load_problem(filename)
        except InputError as err:
            instances.append((filename.stem, None, f'skipped: {err}'))
            continue
        if problem.kind != 'antilinear':
            instances.append((filename.stem, None, f'skipped: kind {problem.kind}'))
        else:
            instances.append((filename.stem, problem.system, problem.weights))
    return instances


def bench_instance(name: str, sys_: AntilinearSystem | None, w, opts: SolverOptions) -> dict:
    """ One report row. `w` holds the skip note when sys_ is None. """
    row = dict.fromkeys(COLUMNS, np.nan)
    row.update(instance=name, note='')
    if sys_ is None:
        row['note'] = w
        return row
    row.update(n=sys_.n, m=sys_.m)
    if not is_stabilizable_antilinear(sys_):
        row['note'] = 'skipped: not stabilizable'
        return row
    t0 = perf_counter()
    try:
        anti = solve_anti_riccati(sys_, w, opts)
        normal = solve_normal_riccati(build_normal_data(sys_, w), opts)
        bim = solve_bimatrix_riccati(sys_.lift(), w, opts)
    except BiLQRError as err:
        row['note'] = f'failed: {type(err).__name__}: {err}'
        logger.warning('instance %s failed: %s', name, err)
        return row
    row.update(anti_iters=anti.iterations, normal_iters=normal.iterations,
               bimatrix_iters=bim.iterations, anti_residual=anti.residual,
               normal_residual=normal.residual, bimatrix_residual=bim.residual,
               wall_time=perf_counter() - t0)
    return row


def run_bench(instances: list, opts: SolverOptions, jobs=1) -> pd.DataFrame:
    """ Evaluate instances (concurrently when jobs > 1); rows keep the instance order """
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(lambda inst: bench_instance(*inst, opts), instances))
    df = pd.DataFrame(rows, columns=list(COLUMNS))
    int_cols = ['n', 'm', 'anti_iters', 'normal_iters', 'bimatrix_iters']
    df[int_cols] = df[int_cols].astype('Int64')
    done = df.dropna(subset=['anti_iters', 'normal_iters'])
    if len(done):
        rate = float((done['normal_iters'] <= done['anti_iters']).mean())
        logger.info('normal iteration needs no more steps than anti-Riccati on %.1f%% of %d instances',
                    100 * rate, len(done))
        if rate < CLAIM_RATE:
            logger.warning('normal iteration was not faster on %d of %d instances',
                           int(round((1 - rate) * len(done))), len(done))
    return df


def cmd_bench(input_dir=None, random=None, prefs: Prefs | None = None) -> int:
    """ Write the benchmark CSV to prefs.output or stdout.
    :argument
        input_dir: directory of problem documents
        random: (n, m, count, seed) for a random suite
    """
    prefs = prefs or Prefs()
    try:
        opts, _, _ = parse_options({}, tol=prefs.tol, max_iter=prefs.max_iter)
        if random is not None:
            n, m, count, seed = (int(v) for v in random)
            if n < 1 or m < 1 or count < 0:
                raise InputError('random', 'n and m must be >= 1 and count >= 0')
            instances = random_instances(n, m, count, seed)
        elif input_dir is not None:
            if not Path(input_dir).is_dir():
                raise InputError('input_dir', f'{input_dir} is not a directory')
            instances = directory_instances(input_dir)
        else:
            raise InputError('input', 'give a directory or --random n m count seed')
    except InputError as err:
        print(f'input error: {err}', file=sys.stderr)
        return EXIT_CODE['input']
    df = run_bench(instances, opts, prefs.jobs)
    if prefs.output:
        df.to_csv(prefs.output, index=False)
        logger.info('bench report written to %s', prefs.output)
    else:
        df.to_csv(sys.stdout, index=False)
    return EXIT_CODE['ok']
