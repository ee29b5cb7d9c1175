#!/usr/bin/env python3
"""
ncdomain Command-Line Interface
Parses JSON inputs, runs one library operation and writes a versioned JSON report.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config import Config
from .errors import NumericalError, ValidationError
from .fock import build_fock, defect_residual, sparse_max_abs
from .reports import (build_report, load_json, parse_coefficient_map, parse_pick_problem,
                      parse_point, parse_symbol, parse_tuple, write_report)
from .symbol import (FreeSymbol, compute_b, equivalence_test, gamma_constant, radius_test,
                     reverse_symbol, schwarz_constant)
from .words import enumerate_words, word

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Resolved options for one CLI invocation"""
    command: str
    symbol_path: Optional[str] = None
    tuple_paths: List[str] = field(default_factory=list)
    level: Optional[int] = None
    degree: Optional[int] = None
    k_max: Optional[int] = None
    overrides: Dict[str, str] = field(default_factory=dict)
    out: Optional[str] = None
    seed: int = 0
    verbosity: int = 0

    def __post_init__(self):
        if self.level is not None and self.level < 1:
            raise ValidationError(f"level must be >= 1, got {self.level}", field="--level")
        if self.degree is not None and self.degree < 0:
            raise ValidationError(f"degree must be >= 0, got {self.degree}", field="--degree")
        if self.k_max is not None and self.k_max < 1:
            raise ValidationError(f"k_max must be >= 1, got {self.k_max}", field="--kmax")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        overrides = {}
        for item in args.tol or []:
            name, sep, value = item.partition('=')
            if not sep:
                raise ValidationError(f"expected NAME=VALUE, got {item!r}", field="--tol")
            overrides[name.strip()] = value.strip()
        command = args.command + (f" {args.action}" if getattr(args, 'action', None) else "")
        return cls(
            command=command,
            symbol_path=getattr(args, 'symbol', None),
            tuple_paths=[args.tuple] if getattr(args, 'tuple', None) else [],
            level=getattr(args, 'level', None),
            degree=getattr(args, 'degree', None),
            k_max=getattr(args, 'kmax', None),
            overrides=overrides,
            out=args.out,
            seed=Config.DEFAULT_SEED if args.seed is None else args.seed,
            verbosity=args.verbose - args.quiet,
        )


@dataclass
class Outcome:
    """What a handler hands back to dispatch"""
    result: Any
    summary: str
    symbol: Optional[FreeSymbol] = None
    level: Optional[int] = None
    interior_degree: Optional[int] = None


# ===== HANDLERS =====

def _symbol(run: RunConfig) -> FreeSymbol:
    if not run.symbol_path:
        raise ValidationError("a symbol file is required", field="--symbol")
    return parse_symbol(load_json(run.symbol_path))


def _tuple(run: RunConfig):
    if not run.tuple_paths:
        raise ValidationError("a tuple file is required", field="--tuple")
    return parse_tuple(load_json(run.tuple_paths[0]))


def _level(run: RunConfig) -> int:
    if run.level is None:
        raise ValidationError("a truncation level is required", field="--level")
    return run.level


def symbol_coeffs(run: RunConfig, args: argparse.Namespace) -> Outcome:
    f = _symbol(run)
    degree = 4 if run.degree is None else run.degree
    b = compute_b(f, degree)
    result = {
        'n': f.n,
        'degree': degree,
        'b': [{'word': w.to_json(), 'b': value} for w, value in b.values.items()],
        'prefix_residual': b.prefix_residual(f),
        'suffix_residual': b.suffix_residual(f),
        'submultiplicativity_excess': b.check_submultiplicativity() if degree >= 2 else None,
    }
    return Outcome(result, f"✅ b-table to degree {degree} ({len(b.values)} words)", f)


def symbol_constants(run: RunConfig, args: argparse.Namespace) -> Outcome:
    f = _symbol(run)
    degree = 4 if run.degree is None else run.degree
    b = compute_b(f, max(degree + 1, f.support_degree))
    reversed_b = compute_b(reverse_symbol(f), b.degree)
    result: Dict[str, Any] = {
        'gamma': gamma_constant(f, b),
        'schwarz': schwarz_constant(f, b, degree),
        'reversal_equivalence': equivalence_test(b, reversed_b),
    }
    if args.coeffs:
        c = parse_coefficient_map(load_json(args.coeffs))
        top = max([len(w) for w in c] + [1])
        result['radius'] = radius_test(c, compute_b(f, top), top)
    return Outcome(result, f"✅ gamma={result['gamma']:.12g}, M={result['schwarz']:.12g}", f)


def fock_build(run: RunConfig, args: argparse.Namespace) -> Outcome:
    f = _symbol(run)
    level = _level(run)
    F = build_fock(f, level)
    Ft = build_fock(reverse_symbol(f), level)
    U = F.reversal_unitary()
    reversal = max(sparse_max_abs(U.T @ Li @ U - Wt) for Li, Wt in zip(F.L, Ft.W))
    result = {
        'n': f.n,
        'dim': F.dim,
        'defect_residual': defect_residual(F),
        'reversal_residual': reversal,
        'weight_histograms': [F.weight_histogram(i) for i in range(f.n)],
    }
    return Outcome(result, f"✅ Fock space of dimension {F.dim}, defect residual {result['defect_residual']:.3e}",
                   f, level, F.interior_degree)


def tuple_classify(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.tuples import classify

    f, T = _symbol(run), _tuple(run)
    report = classify(f, T, run.k_max)
    return Outcome(report, f"✅ member={report.member}, pure={report.pure}, cnc={report.cnc}, "
                           f"r_f={report.spectral_radius:.6g}", f)


def tuple_radius(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.tuples import cauchy_norm_bound, reconstruction_radius_check, spectral_radius

    f, T = _symbol(run), _tuple(run)
    radius = spectral_radius(f, T, run.k_max)
    result: Dict[str, Any] = {'spectral_radius': radius}
    if radius.value < 1:
        result['cauchy_norm_bound'] = cauchy_norm_bound(f, T, run.k_max)
    level = run.level
    interior = None
    if level is not None:
        F = build_fock(f, level)
        result['reconstruction'] = reconstruction_radius_check(f, T, F, run.k_max)
        interior = F.interior_degree
    return Outcome(result, f"✅ r_f(T) = {radius.value:.6g} after {radius.iterations} steps", f, level, interior)


def poisson_verify(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.poisson import (build_poisson, intertwine_residual, kk_bracket, kk_residual,
                                 transform_residual)

    f, T = _symbol(run), _tuple(run)
    level = _level(run)
    F = build_fock(f, level)
    P = build_poisson(f, T, F)
    depth = min(2, level)
    worst, worst_excess = 0.0, -np.inf
    for alpha in enumerate_words(f.n, depth):
        for beta in enumerate_words(f.n, depth):
            residual, bound = transform_residual(P, F, f, T, alpha, beta)
            worst = max(worst, residual)
            worst_excess = max(worst_excess, residual - bound)
    result = {
        'kk_residual': kk_residual(P),
        'kk_bracket': kk_bracket(P, f, T),
        'intertwine_residual': intertwine_residual(P, F, T),
        'transform_residual': worst,
        'transform_within_bound': bool(worst_excess <= 1e-8),
        'transform_depth': depth,
        'tail_bound': P.tail_bound,
        'defect_rank': P.defect_rank,
    }
    return Outcome(result, f"✅ ||K*K - I|| = {result['kk_residual']:.3e}, tail {P.tail_bound:.3e}",
                   f, level, F.interior_degree)


def kernel_eval(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.kernel import (eigen_residual, kernel_gram, kernel_series, kernel_value,
                                random_interior_points, z_vector)

    f = _symbol(run)
    level = _level(run)
    F = build_fock(f, level)
    if args.points < 1:
        raise ValidationError(f"need at least one point, got {args.points}", field="--points")
    rng = np.random.default_rng(run.seed)
    points = random_interior_points(f, args.points, rng, args.max_gauge)
    entries = []
    for lam in points:
        z = z_vector(f, F, lam)
        entries.append({
            'point': lam,
            'norm_sq': z.norm_sq,
            'closed_norm_sq': z.closed_norm_sq,
            'tail_bound': z.tail_bound,
            'eigen_residual': eigen_residual(F, z.vector, lam),
            'eigen_tail_bound': z.eigen_tail_bound,
        })
    pairs = []
    for i, mu in enumerate(points):
        for j, lam in enumerate(points):
            series, tail = kernel_series(f, F, mu, lam)
            exact = kernel_value(f, mu, lam)
            pairs.append({'i': i, 'j': j, 'kernel': exact, 'series': series,
                          'error': abs(exact - series), 'tail_bound': tail})
    gram = kernel_gram(f, points)
    min_eig = float(np.linalg.eigvalsh((gram + gram.conj().T) / 2)[0])
    result = {'points': entries, 'pairs': pairs, 'gram_min_eig': min_eig}
    worst = max(p['error'] - p['tail_bound'] for p in pairs)
    return Outcome(result, f"✅ {len(points)} points, worst kernel error minus tail {worst:.3e}",
                   f, level, F.interior_degree)


def pick_feasible_cmd(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.kernel import pick_feasible

    f = _symbol(run)
    if not args.problem:
        raise ValidationError("a Pick problem file is required", field="--problem")
    problem = parse_pick_problem(load_json(args.problem))
    verdict = pick_feasible(f, problem)
    result = {
        'feasible': verdict.feasible,
        'min_eig': verdict.min_eig,
        'tolerance': verdict.tolerance,
        'asymmetry': verdict.pick.asymmetry,
        'pick_matrix': verdict.pick.matrix,
    }
    mark = '✅' if verdict.feasible else '❌'
    return Outcome(result, f"{mark} feasible={verdict.feasible}, min_eig={verdict.min_eig:.3e}", f)


def charfn_point(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.charcurv import char_point, char_point_residual

    f, T = _symbol(run), _tuple(run)
    if not args.z:
        raise ValidationError("a point file is required", field="--z")
    z = parse_point(load_json(args.z), "z")
    theta = char_point(f, T, z)
    residual = char_point_residual(f, T, z)
    result = {'z': z, 'theta': theta, 'factorization_residual': residual}
    return Outcome(result, f"✅ Theta(z) of shape {theta.shape}, residual {residual:.3e}", f)


def charfn_verify(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.charcurv import (char_data, char_multianalytic_residual, char_operator,
                                  factorization_residual)

    f, T = _symbol(run), _tuple(run)
    level = _level(run)
    F = build_fock(f, level)
    data = char_data(f, T)
    theta = char_operator(f, T, F, data)
    result = {
        'index_words': data.index_words,
        'rank_delta_c': data.rank_c,
        'rank_delta_c_star': data.rank_c_star,
        'defect_intertwining_residual': data.intertwining_residual(),
        'factorization_residual': factorization_residual(f, T, F, theta),
        'multianalytic_residual': char_multianalytic_residual(F, theta, T.d, data.C.shape[1]),
    }
    return Outcome(result, f"✅ factorization residual {result['factorization_residual']:.3e}",
                   f, level, F.interior_degree)


def curvature_cmd(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.charcurv import curvature, ellipsoid_report, star_curvature

    p, T = _symbol(run), _tuple(run)
    result: Dict[str, Any] = {
        'curvature': curvature(p, T, run.k_max),
        'star_curvature': star_curvature(p, T, run.k_max),
    }
    if p.is_linear:
        weights = [p[word(i)] for i in range(p.n)]
        report = ellipsoid_report(weights, T, run.k_max)
        result['ellipsoid'] = {'weights': weights, 'defect_rank': report.defect_rank,
                               'pure': report.pure, 'model_candidate': report.model_candidate}
    curv = result['curvature']
    return Outcome(result, f"✅ curvature {curv.value:.6g} ({curv.branch.value} branch), "
                           f"*-curvature {result['star_curvature'].value:.6g}", p)


def corona_cmd(run: RunConfig, args: argparse.Namespace) -> Outcome:
    from engines.kernel import corona_delta

    f = _symbol(run)
    level = _level(run)
    if not args.functions:
        raise ValidationError("a functions file is required", field="--functions")
    data = load_json(args.functions)
    if isinstance(data, dict):
        data = data.get('functions')
    if not isinstance(data, list):
        raise ValidationError("expected a list of coefficient maps", field="functions")
    phis = [parse_coefficient_map(c, f"functions[{i}]") for i, c in enumerate(data)]
    F = build_fock(f, level)
    d = F.interior_degree if run.degree is None else run.degree
    delta = corona_delta(F, phis, d)
    result = {'delta_sq': delta, 'delta': float(np.sqrt(max(delta, 0.0))), 'degree': d,
              'functions': len(phis)}
    return Outcome(result, f"✅ corona delta^2 >= {delta:.6g} on degrees <= {d}", f, level, F.interior_degree)


HANDLERS: Dict[str, Callable[[RunConfig, argparse.Namespace], Outcome]] = {
    'symbol coeffs': symbol_coeffs,
    'symbol constants': symbol_constants,
    'fock build': fock_build,
    'tuple classify': tuple_classify,
    'tuple radius': tuple_radius,
    'poisson verify': poisson_verify,
    'kernel eval': kernel_eval,
    'pick feasible': pick_feasible_cmd,
    'charfn point': charfn_point,
    'charfn verify': charfn_verify,
    'curvature': curvature_cmd,
    'corona': corona_cmd,
}


# ===== PARSER =====

def create_cli_interface() -> argparse.ArgumentParser:
    """Create the argparse tree: subcommand, then action where one exists"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Write the JSON report here instead of stdout')
    common.add_argument('--seed', type=int, help='Seed for randomized checks (default NCDOMAIN_SEED or 0)')
    common.add_argument('--tol', action='append', metavar='NAME=VALUE', help='Override a tolerance')
    common.add_argument('-v', '--verbose', action='count', default=0, help='More logging')
    common.add_argument('-q', '--quiet', action='count', default=0, help='Less logging')

    def symbol_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument('--symbol', required=True, help='Symbol JSON file')

    def tuple_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument('--tuple', required=True, help='Operator tuple JSON file')

    parser = argparse.ArgumentParser(prog='ncdomain', description="Noncommutative domain toolkit")
    subparsers = parser.add_subparsers(dest='command', required=True, help='Available commands')

    # symbol
    symbol_parser = subparsers.add_parser('symbol', help='Coefficient tables and constants')
    symbol_actions = symbol_parser.add_subparsers(dest='action', required=True)
    coeffs = symbol_actions.add_parser('coeffs', parents=[common], help='b-table to a degree')
    symbol_arg(coeffs)
    coeffs.add_argument('--degree', type=int, help='Largest word length (default 4)')
    constants = symbol_actions.add_parser('constants', parents=[common], help='gamma, Schwarz constant, radius test')
    symbol_arg(constants)
    constants.add_argument('--degree', type=int, help='Schwarz constant degree (default 4)')
    constants.add_argument('--coeffs', help='Coefficient map JSON for the radius test')

    # fock
    fock_parser = subparsers.add_parser('fock', help='Truncated weighted Fock space')
    fock_actions = fock_parser.add_subparsers(dest='action', required=True)
    build = fock_actions.add_parser('build', parents=[common], help='Build and check W_i at a level')
    symbol_arg(build)
    build.add_argument('--level', type=int, required=True)

    # tuple
    tuple_parser = subparsers.add_parser('tuple', help='Concrete operator tuples')
    tuple_actions = tuple_parser.add_subparsers(dest='action', required=True)
    classify = tuple_actions.add_parser('classify', parents=[common], help='Membership, purity, c.n.c.')
    symbol_arg(classify)
    tuple_arg(classify)
    classify.add_argument('--kmax', type=int)
    radius = tuple_actions.add_parser('radius', parents=[common], help='Joint spectral radius')
    symbol_arg(radius)
    tuple_arg(radius)
    radius.add_argument('--kmax', type=int)
    radius.add_argument('--level', type=int, help='Also check the reconstruction operator at this level')

    # poisson
    poisson_parser = subparsers.add_parser('poisson', help='Poisson kernel')
    poisson_actions = poisson_parser.add_subparsers(dest='action', required=True)
    verify = poisson_actions.add_parser('verify', parents=[common], help='Kernel identities and transform')
    symbol_arg(verify)
    tuple_arg(verify)
    verify.add_argument('--level', type=int, required=True)

    # kernel
    kernel_parser = subparsers.add_parser('kernel', help='Reproducing kernel at scalar points')
    kernel_actions = kernel_parser.add_subparsers(dest='action', required=True)
    kernel_eval_parser = kernel_actions.add_parser('eval', parents=[common], help='z_lambda and K_f at random points')
    symbol_arg(kernel_eval_parser)
    kernel_eval_parser.add_argument('--level', type=int, required=True)
    kernel_eval_parser.add_argument('--points', type=int, default=3, help='Number of random points')
    kernel_eval_parser.add_argument('--max-gauge', type=float, default=0.9, help='Largest gauge sampled')

    # pick
    pick_parser = subparsers.add_parser('pick', help='Nevanlinna-Pick interpolation')
    pick_actions = pick_parser.add_subparsers(dest='action', required=True)
    feasible = pick_actions.add_parser('feasible', parents=[common], help='Pick matrix test')
    symbol_arg(feasible)
    feasible.add_argument('--problem', required=True, help='Pick problem JSON file')

    # charfn
    charfn_parser = subparsers.add_parser('charfn', help='Characteristic function')
    charfn_actions = charfn_parser.add_subparsers(dest='action', required=True)
    point = charfn_actions.add_parser('point', parents=[common], help='Theta at a scalar point')
    symbol_arg(point)
    tuple_arg(point)
    point.add_argument('--z', required=True, help='Point JSON file')
    check = charfn_actions.add_parser('verify', parents=[common], help='Truncated factorization check')
    symbol_arg(check)
    tuple_arg(check)
    check.add_argument('--level', type=int, required=True)

    # curvature
    curvature_parser = subparsers.add_parser('curvature', parents=[common], help='Curvature and *-curvature')
    symbol_arg(curvature_parser)
    tuple_arg(curvature_parser)
    curvature_parser.add_argument('--kmax', type=int)

    # corona
    corona_parser = subparsers.add_parser('corona', parents=[common], help='Corona lower bound')
    symbol_arg(corona_parser)
    corona_parser.add_argument('--level', type=int, required=True)
    corona_parser.add_argument('--functions', required=True, help='JSON list of coefficient maps')
    corona_parser.add_argument('--degree', type=int, help='Compression degree (default interior degree)')

    return parser


def _configure_logging(verbosity: int) -> None:
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    else:
        level = getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format=Config.LOG_FORMAT, stream=sys.stderr, force=True)


def _snapshot() -> Dict[str, Any]:
    return {key: getattr(Config, key) for key in Config.TOLERANCE_KEYS}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""
    parser = create_cli_interface()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    saved = _snapshot()
    try:
        run = RunConfig.from_args(args)
        _configure_logging(run.verbosity)
        Config.validate()
        if run.overrides:
            applied = Config.apply_overrides(run.overrides)
            logger.info(f"⚙️ Tolerance overrides: {applied}")
        outcome = HANDLERS[run.command](run, args)
        report = build_report(run.command, outcome.result, outcome.symbol, outcome.level,
                              outcome.interior_degree, run.seed)
        text = write_report(report, run.out)
        if not run.out:
            print(text)
        print(outcome.summary, file=sys.stderr)
        return 0
    except NumericalError as e:
        print(f"❌ Numerical failure: {e}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as e:
        print(f"❌ Linear algebra failure: {e}", file=sys.stderr)
        return 3
    except MemoryError:
        print("❌ Numerical failure: out of memory, lower --level or NCDOMAIN_DIM_CAP", file=sys.stderr)
        return 3
    except ValidationError as e:
        print(f"❌ Invalid input: {e}", file=sys.stderr)
        return 2
    except KeyError as e:
        print(f"❌ Invalid option: {e.args[0]}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"❌ Invalid value: {e}", file=sys.stderr)
        return 2
    finally:
        for key, value in saved.items():
            setattr(Config, key, value)


def cli_main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
