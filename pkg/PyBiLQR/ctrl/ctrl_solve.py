#! encoding = utf-8

""" Controllers of the solve, check and verify commands.
    Each command returns an exit code; library errors are mapped in `run`.
"""

import sys
import logging
from datetime import timedelta
from pathlib import Path
from time import perf_counter
import numpy as np

from PyBiLQR.config.config import (Prefs, to_json, dumps, from_json, load_problem, parse_problem,
                                   parse_options, decode_matrix)
from PyBiLQR.libs import common
from PyBiLQR.libs.bimatrix import HermitianBimatrix, bnorm
from PyBiLQR.libs.consts import EXIT_CODE, VERSION
from PyBiLQR.libs.errors import (BiLQRError, InputError, Diverged, SolverError, SingularMatrix,
                                 StructureViolation)
from PyBiLQR.libs.lqr import (lqr_complex, lqr_antilinear_anti, lqr_antilinear_normal,
                              cross_validate_antilinear, LQRResult)
from PyBiLQR.libs.riccati import (bimatrix_riccati_residual, anti_riccati_residual,
                                  normal_riccati_residual, build_normal_data)
from PyBiLQR.libs.stabilizability import find_unstable_mode_complex, find_unstable_mode_antilinear
from PyBiLQR.libs.system import simulate
from PyBiLQR.libs.timedelay import solve_delay_lqr, simulate_delay, lift_delay_system

logger = logging.getLogger(__name__)


class NotStabilizable(BiLQRError):
    """ Rank test failed before solving """

    def __init__(self, eigenvalue):
        super().__init__(f'system not stabilizable: mode {_fmt_complex(eigenvalue)} '
                         f'fails the rank test')
        self.eigenvalue = eigenvalue


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) <= 1e-12 * max(1., abs(z.real)):
        return f'{z.real:.6g}'
    return f'{z.real:.6g}{z.imag:+.6g}j'


def run(command, *args, **kwargs) -> int:
    """ Call a command and map library errors to exit codes with a one-line diagnostic """
    try:
        return command(*args, **kwargs)
    except InputError as err:
        print(f'input error: {err}', file=sys.stderr)
        return EXIT_CODE['input']
    except NotStabilizable as err:
        print(err, file=sys.stderr)
        return EXIT_CODE['not_stabilizable']
    except Diverged as err:
        print(f'system not stabilizable: {err}', file=sys.stderr)
        return EXIT_CODE['not_stabilizable']
    except (SolverError, SingularMatrix, StructureViolation) as err:
        print(f'no convergence: {err}', file=sys.stderr)
        return EXIT_CODE['not_convergent']
    except BiLQRError as err:
        print(f'input error: {err}', file=sys.stderr)
        return EXIT_CODE['input']


class CtrlSolve:
    """ Solve a problem document and write the result document and CSV sidecars """

    def __init__(self, prefs: Prefs):
        self.prefs = prefs

    # -- output helpers ---------------------------------------------------

    def _stem(self, input_path) -> Path:
        if self.prefs.output:
            out = Path(self.prefs.output)
            return out.with_suffix('')
        return Path(Path(input_path).stem)

    def _write_result(self, result: dict):
        if self.prefs.output:
            to_json(result, self.prefs.output)
            logger.info('result written to %s', self.prefs.output)
        else:
            print(dumps(result))

    def _write_trace(self, input_path, solution, suffix='trace'):
        if not self.prefs.trace or solution.trace is None:
            return
        filename = f'{self._stem(input_path)}_{suffix}.csv'
        rows = np.array([tuple(r) for r in solution.trace], dtype=float).reshape(-1, 3)
        np.savetxt(filename, rows, delimiter=',', header='iter,residual,step', comments='',
                   fmt=['%d', '%.10e', '%.10e'])
        logger.info('trace written to %s', filename)

    def _write_trajectory(self, input_path, k_col, states, inputs):
        """ states and inputs are per-step rows; complex columns split into re/im """
        filename = f'{self._stem(input_path)}_trajectory.csv'
        n_in = inputs.shape[1]
        inputs = np.vstack([inputs, np.full((1, n_in), np.nan)])
        if np.iscomplexobj(states):
            header = (['k']
                      + [f'state_{i + 1}_{c}' for i in range(states.shape[1]) for c in ('re', 'im')]
                      + [f'input_{i + 1}_{c}' for i in range(n_in) for c in ('re', 'im')])
            states = _split_complex(states)
            inputs = _split_complex(inputs)
        else:
            header = (['k'] + [f'state_{i + 1}' for i in range(states.shape[1])]
                      + [f'input_{i + 1}' for i in range(n_in)])
        data = np.column_stack([k_col, states, inputs])
        np.savetxt(filename, data, delimiter=',', header=','.join(header), comments='', fmt='%.10e')
        logger.info('trajectory written to %s', filename)

    def _options(self, doc):
        return parse_options(doc, tol=self.prefs.tol, max_iter=self.prefs.max_iter,
                             method=self.prefs.method, horizon=self.prefs.horizon,
                             record_trace=self.prefs.trace)

    @staticmethod
    def _header(kind, method, opts) -> dict:
        return {'kind': kind, 'version': VERSION, 'method': method,
                'options': {'tol': opts.tol, 'max_iter': opts.max_iter,
                            'divergence_bound': opts.divergence_bound,
                            'residual_factor': opts.residual_factor}}

    # -- commands ---------------------------------------------------------

    def solve_complex(self, input_path) -> int:
        t0 = perf_counter()
        doc = from_json(input_path)
        problem = parse_problem(doc, 'complex')
        opts, _, horizon = self._options(doc)
        res = lqr_complex(problem.system, problem.weights, opts)
        result = self._header('complex', 'bimatrix', opts)
        result.update(_lqr_entry(res, problem.x0))
        result['timing'] = {'wall_time': _elapsed(t0)}
        self._write_result(result)
        self._write_trace(input_path, res.solution)
        if horizon is not None and problem.x0 is not None:
            traj = simulate(problem.system, res.gain, problem.x0, horizon)
            self._write_trajectory(input_path, np.arange(horizon + 1), traj.states, traj.inputs)
        return EXIT_CODE['ok']

    def solve_antilinear(self, input_path) -> int:
        t0 = perf_counter()
        doc = from_json(input_path)
        problem = parse_problem(doc, 'antilinear')
        opts, method, horizon = self._options(doc)
        sys_, w = problem.system, problem.weights
        mode = find_unstable_mode_antilinear(sys_)
        if mode is not None:
            raise NotStabilizable(mode)
        result = self._header('antilinear', method, opts)
        if method == 'all':
            report = cross_validate_antilinear(sys_, w, opts, problem.x0)
            results = report.results
            result['discrepancies'] = report.discrepancies
            result['iterations'] = report.iterations
        else:
            route = {'bimatrix': lambda: lqr_complex(sys_.lift(), w, opts),
                     'anti': lambda: lqr_antilinear_anti(sys_, w, opts),
                     'normal': lambda: lqr_antilinear_normal(sys_, w, opts)}[method]
            results = {method: route()}
        result['solutions'] = {name: _lqr_entry(res, problem.x0) for name, res in results.items()}
        result['timing'] = {'wall_time': _elapsed(t0)}
        self._write_result(result)
        for name, res in results.items():
            self._write_trace(input_path, res.solution, 'trace' if len(results) == 1 else f'{name}_trace')
        if horizon is not None and problem.x0 is not None:
            res = next(iter(results.values()))
            traj = simulate(sys_.lift(), res.gain, problem.x0, horizon)
            self._write_trajectory(input_path, np.arange(horizon + 1), traj.states, traj.inputs)
        return EXIT_CODE['ok']

    def solve_delay(self, input_path) -> int:
        t0 = perf_counter()
        doc = from_json(input_path)
        problem = parse_problem(doc, 'delay')
        opts, _, horizon = self._options(doc)
        ds, ic = problem.system, problem.ic
        res = solve_delay_lqr(ds, opts)
        result = self._header('delay', 'bimatrix', opts)
        result.update(_lqr_entry(res.lqr, None))
        result.update({'f': res.feedback.f, 'l0': res.l0, 'padded': res.padded})
        if ic is not None:
            result['jmin'] = res.jmin(ic)
            result['jmin_lifted'] = res.jmin_lifted(ic)
        result['timing'] = {'wall_time': _elapsed(t0)}
        self._write_result(result)
        self._write_trace(input_path, res.solution)
        if horizon is not None and ic is not None:
            traj, cost = simulate_delay(ds, res.feedback, ic, horizon)
            logger.info('closed-loop cost over %d steps: %.10g', horizon, cost)
            self._write_trajectory(input_path, np.arange(horizon + 1), traj.xi, traj.inputs)
        return EXIT_CODE['ok']

    def check_stabilizability(self, input_path) -> int:
        problem = load_problem(input_path)
        if problem.kind == 'antilinear':
            mode = find_unstable_mode_antilinear(problem.system)
        elif problem.kind == 'complex':
            mode = find_unstable_mode_complex(problem.system)
        else:
            mode = find_unstable_mode_complex(lift_delay_system(problem.system).system)
        if mode is None:
            print('stabilizable: true')
            return EXIT_CODE['ok']
        print(f'stabilizable: false (eigenvalue {_fmt_complex(mode)})')
        return EXIT_CODE['not_stabilizable']

    def verify(self, result_path, input_path) -> int:
        """ Re-parse a result document and recompute the residual of the stored solution """
        result = from_json(result_path)
        doc = from_json(input_path)
        problem = parse_problem(doc)
        if result.get('kind') != problem.kind:
            raise InputError('kind', f'result is {result.get("kind")!r}, input is {problem.kind!r}')
        opts = result.get('options', {})
        tol = float(opts.get('tol', 1e-12)) * float(opts.get('residual_factor', 100.))
        checks = []
        if problem.kind == 'antilinear':
            solutions = result.get('solutions')
            if not isinstance(solutions, dict) or not solutions:
                raise InputError('solutions', 'missing')
            for name, entry in solutions.items():
                checks.append((name, *_recheck_antilinear(name, entry, problem)))
        else:
            if problem.kind == 'complex':
                sys_, w = problem.system, problem.weights
            else:
                sys_, w, _, _ = lift_delay_system(problem.system)
            p = _stored_bimatrix(result, '', sys_.n)
            checks.append(('bimatrix', bimatrix_riccati_residual(p, sys_, w), bnorm(p)))
        ok = True
        for name, residual, scale in checks:
            passed = residual <= tol * max(1., scale)
            ok &= passed
            print(f'{name}: residual {residual:.3e} {"ok" if passed else "FAILED"}')
        return EXIT_CODE['ok'] if ok else EXIT_CODE['not_convergent']


def _stored_bimatrix(entry: dict, prefix: str, n: int) -> HermitianBimatrix:
    p1 = decode_matrix(entry.get('p1'), prefix + 'p1')
    p2 = decode_matrix(entry.get('p2'), prefix + 'p2')
    for name, m in (('p1', p1), ('p2', p2)):
        if m.shape != (n, n):
            raise InputError(prefix + name, f'expected shape {n} x {n}, got {m.shape[0]} x {m.shape[1]}')
    return HermitianBimatrix(p1, p2)


def _recheck_antilinear(name, entry, problem) -> tuple[float, float]:
    sys_, w = problem.system, problem.weights
    prefix = f'solutions.{name}.'
    p = _stored_bimatrix(entry, prefix, sys_.n)
    if name == 'bimatrix':
        return bimatrix_riccati_residual(p, sys_.lift(), w), bnorm(p)
    if name == 'anti':
        return anti_riccati_residual(p.p1, sys_, w), bnorm(p)
    if name == 'normal':
        return normal_riccati_residual(p.p1, build_normal_data(sys_, w)), bnorm(p)
    raise InputError(prefix.rstrip('.'), 'unknown method')


def _lqr_entry(res: LQRResult, x0) -> dict:
    sol = res.solution
    entry = {'p1': sol.p.p1, 'p2': sol.p.p2, 'k1': res.gain.k1, 'k2': res.gain.k2,
             'iterations': sol.iterations, 'residual': sol.residual,
             'spectral_radius': res.radius}
    if x0 is not None:
        entry['jmin'] = res.jmin(x0)
    return entry


def _split_complex(m: np.ndarray) -> np.ndarray:
    """ Interleave real and imaginary columns """
    out = np.empty((m.shape[0], 2 * m.shape[1]))
    out[:, 0::2] = m.real
    out[:, 1::2] = m.imag
    return out


def _elapsed(t0) -> str:
    return common.format_timedelta(timedelta(seconds=perf_counter() - t0))


def cmd_solve_complex(input_path, prefs: Prefs | None = None) -> int:
    return run(CtrlSolve(prefs or Prefs()).solve_complex, input_path)


def cmd_solve_antilinear(input_path, prefs: Prefs | None = None) -> int:
    return run(CtrlSolve(prefs or Prefs()).solve_antilinear, input_path)


def cmd_solve_delay(input_path, prefs: Prefs | None = None) -> int:
    return run(CtrlSolve(prefs or Prefs()).solve_delay, input_path)


def cmd_check_stabilizability(input_path, prefs: Prefs | None = None) -> int:
    return run(CtrlSolve(prefs or Prefs()).check_stabilizability, input_path)


def cmd_verify(result_path, input_path, prefs: Prefs | None = None) -> int:
    return run(CtrlSolve(prefs or Prefs()).verify, result_path, input_path)
