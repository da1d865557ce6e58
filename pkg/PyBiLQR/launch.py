#! encoding = utf-8

""" Command line entry of PyBiLQR: LQR synthesis for complex-valued,
antilinear and one-step delay discrete-time systems by Riccati iteration.

Exit codes: 0 ok, 2 input error, 3 not stabilizable, 4 no convergence.
"""

import sys
import argparse
import logging

from PyBiLQR.config.config import Prefs
from PyBiLQR.ctrl.ctrl_solve import (cmd_solve_complex, cmd_solve_antilinear, cmd_solve_delay,
                                     cmd_check_stabilizability, cmd_verify)
from PyBiLQR.ctrl.ctrl_bench import cmd_bench
from PyBiLQR.libs.consts import VERSION, METHODS, EXIT_CODE


def _add_solver_flags(p):
    p.add_argument('--tol', type=float, help='relative step tolerance (default 1e-12)')
    p.add_argument('--max-iter', dest='max_iter', type=int, help='iteration budget (default 100000)')
    p.add_argument('-o', '--output', help='result file; CSV sidecars are named after it')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pybilqr', description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress')
    parser.add_argument('--debug', action='store_true', help='log iteration details')
    sub = parser.add_subparsers(dest='command', required=True)

    for name, helptext in (('solve-complex', 'solve a complex-valued system'),
                           ('solve-antilinear', 'solve an antilinear system'),
                           ('solve-delay', 'solve a one-step delay system')):
        p = sub.add_parser(name, help=helptext)
        p.add_argument('input', help='problem document (JSON)')
        _add_solver_flags(p)
        p.add_argument('--trace', action='store_true', help='write <stem>_trace.csv')
        p.add_argument('--horizon', type=int,
                       help='write a closed-loop <stem>_trajectory.csv over this many steps')
        if name == 'solve-antilinear':
            p.add_argument('--method', choices=METHODS, help='solver route (default all)')

    p = sub.add_parser('check-stab', help='rank test for stabilizability')
    p.add_argument('input', help='problem document (JSON)')

    p = sub.add_parser('bench', help='iteration counts of the antilinear solvers')
    p.add_argument('input_dir', nargs='?', help='directory of problem documents')
    p.add_argument('--random', nargs=4, type=int, metavar=('N', 'M', 'COUNT', 'SEED'),
                   help='random antilinear suite')
    p.add_argument('--jobs', type=int, default=1, help='instances evaluated concurrently')
    _add_solver_flags(p)

    p = sub.add_parser('verify', help='recompute the residual of a result document')
    p.add_argument('result', help='result document written by a solve command')
    p.add_argument('input', help='problem document the result was solved from')
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse exits 2 on usage errors, 0 on --help / --version
        return EXIT_CODE['input'] if err.code else EXIT_CODE['ok']

    level = logging.DEBUG if args.debug else (logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    prefs = Prefs.from_args(args)

    if args.command == 'solve-complex':
        return cmd_solve_complex(args.input, prefs)
    if args.command == 'solve-antilinear':
        return cmd_solve_antilinear(args.input, prefs)
    if args.command == 'solve-delay':
        return cmd_solve_delay(args.input, prefs)
    if args.command == 'check-stab':
        return cmd_check_stabilizability(args.input, prefs)
    if args.command == 'bench':
        return cmd_bench(args.input_dir, args.random, prefs)
    return cmd_verify(args.result, args.input, prefs)


if __name__ == '__main__':

    sys.exit(main())
