#! encoding = utf-8

""" Run preferences and the JSON document codec.

Problem documents are JSON objects with a `kind` key (complex, antilinear
or delay), an optional `options` block and kind-specific matrix fields.
Complex entries are written as [re, im] pairs, real entries as plain
numbers. Matrices are lists of rows, vectors are lists of entries, and a
plain number stands for a 1 x 1 matrix.
"""

import json
from dataclasses import dataclass, fields, is_dataclass
import numpy as np

from PyBiLQR.libs.consts import VERSION, KINDS, METHODS, DATA_DIR
from PyBiLQR.libs.errors import InputError, BiLQRError
from PyBiLQR.libs.riccati import SolverOptions
from PyBiLQR.libs.system import ComplexLinearSystem, AntilinearSystem, CostWeights
from PyBiLQR.libs.timedelay import DelaySystem, DelayInitialCondition


def to_json(obj, filename):
    """ Serialize an object to json and save on disk
    :argument
        obj: dataclass, dict or plain value
        filename: str           filename to be saved
    """

    with open(filename, 'w', encoding='utf-8') as fp:
        json.dump(_obj2dict(obj), fp, indent=2)


def dumps(obj) -> str:
    """ Same encoding as to_json, returned as text """
    return json.dumps(_obj2dict(obj), indent=2)


def from_json(filename) -> dict:
    """ Load a json document. Raises InputError if it cannot be read. """
    try:
        with open(filename, 'r', encoding='utf-8') as fp:
            doc = json.load(fp)
    except OSError as err:
        raise InputError('document', f'cannot read {filename}: {err.strerror}') from err
    except json.JSONDecodeError as err:
        raise InputError('document', f'invalid JSON at line {err.lineno}: {err.msg}') from err
    if not isinstance(doc, dict):
        raise InputError('document', 'top level must be a JSON object')
    return doc


def fixture(name: str):
    """ Path of a bundled problem document """
    return DATA_DIR.joinpath(name)


def _obj2dict(obj):
    """ Convert dataclasses, dicts, arrays and complex numbers to json-able values """
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _obj2dict(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _obj2dict(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return encode_matrix(obj)
    if isinstance(obj, (list, tuple)):
        return [_obj2dict(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode_entry(complex(obj))
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _encode_entry(z):
    if isinstance(z, complex) or np.iscomplexobj(z):
        z = complex(z)
        return [z.real, z.imag]
    return float(z)


def encode_matrix(m: np.ndarray):
    """ Nested lists; complex arrays use [re, im] pairs for every entry """
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if m.ndim == 0:
            return _encode_entry(m.item())
        return [encode_matrix(row) for row in m] if m.ndim > 1 else [[z.real, z.imag] for z in m.tolist()]
    return m.astype(float).tolist()


def _decode_entry(v, field) -> complex:
    if isinstance(v, bool):
        raise InputError(field, f'entry {v!r} is not a number')
    if isinstance(v, (int, float)):
        return complex(v)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        return complex(v[0], v[1])
    raise InputError(field, f'entry {v!r} is neither a number nor a [re, im] pair')


def decode_matrix(value, field, real=False) -> np.ndarray:
    """ Decode a matrix field; a plain number is a 1 x 1 matrix """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        rows = [[value]]
    elif isinstance(value, list) and value and all(isinstance(r, list) and r for r in value):
        rows = value
    else:
        raise InputError(field, 'expected a number or a non-empty list of rows')
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputError(field, 'rows have different lengths')
    m = np.array([[_decode_entry(v, field) for v in r] for r in rows], dtype=complex)
    if real:
        if np.any(m.imag != 0):
            raise InputError(field, 'entries must be real')
        return m.real
    return m


def decode_vector(value, field, real=False) -> np.ndarray:
    """ Decode a vector field; a plain number or [re, im] pair is a 1-vector """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise InputError(field, 'expected a non-empty list of entries')
    v = np.array([_decode_entry(x, field) for x in value], dtype=complex)
    if real:
        if np.any(v.imag != 0):
            raise InputError(field, 'entries must be real')
        return v.real
    return v


def _require(doc: dict, key: str, prefix=''):
    if key not in doc:
        raise InputError(prefix + key, 'missing')
    return doc[key]


def _check_shape(m: np.ndarray, shape, field):
    if m.shape != shape:
        raise InputError(field, f'expected shape {shape[0]} x {shape[1]}, got {m.shape[0]} x {m.shape[1]}')


def _check_length(v: np.ndarray, n, field):
    if v.shape[0] != n:
        raise InputError(field, f'expected {n} entries, got {v.shape[0]}')


def _build(field, factory, *args):
    """ Run a library constructor, reporting its validation errors against field """
    try:
        return factory(*args)
    except BiLQRError as err:
        if isinstance(err, InputError):
            raise
        raise InputError(field, str(err)) from err


@dataclass
class ComplexProblem:
    system: ComplexLinearSystem
    weights: CostWeights
    x0: np.ndarray | None = None
    kind: str = 'complex'


@dataclass
class AntilinearProblem:
    system: AntilinearSystem
    weights: CostWeights
    x0: np.ndarray | None = None
    kind: str = 'antilinear'


@dataclass
class DelayProblem:
    system: DelaySystem
    ic: DelayInitialCondition | None = None
    kind: str = 'delay'


def _parse_weights(doc, n, m) -> CostWeights:
    q = decode_matrix(_require(doc, 'q'), 'q')
    r = decode_matrix(_require(doc, 'r'), 'r')
    _check_shape(q, (n, n), 'q')
    _check_shape(r, (m, m), 'r')
    try:
        return CostWeights(q, r)
    except BiLQRError as err:
        raise InputError('q' if str(err).startswith('q') else 'r', str(err)) from err


def _parse_x0(doc, n):
    if 'x0' not in doc:
        return None
    x0 = decode_vector(doc['x0'], 'x0')
    _check_length(x0, n, 'x0')
    return x0


def parse_complex_problem(doc: dict) -> ComplexProblem:
    """ keys: a1, b1 (required), a2, b2 (default zero), q, r, x0 (optional) """
    a1 = decode_matrix(_require(doc, 'a1'), 'a1')
    n = a1.shape[0]
    _check_shape(a1, (n, n), 'a1')
    b1 = decode_matrix(_require(doc, 'b1'), 'b1')
    m = b1.shape[1]
    _check_shape(b1, (n, m), 'b1')
    a2 = decode_matrix(doc['a2'], 'a2') if 'a2' in doc else np.zeros_like(a1)
    b2 = decode_matrix(doc['b2'], 'b2') if 'b2' in doc else np.zeros_like(b1)
    _check_shape(a2, (n, n), 'a2')
    _check_shape(b2, (n, m), 'b2')
    system = _build('system', ComplexLinearSystem.from_matrices, a1, b1, a2, b2)
    return ComplexProblem(system, _parse_weights(doc, n, m), _parse_x0(doc, n))


def parse_antilinear_problem(doc: dict) -> AntilinearProblem:
    """ keys: a2, b2, q, r, x0 (optional) """
    a2 = decode_matrix(_require(doc, 'a2'), 'a2')
    n = a2.shape[0]
    _check_shape(a2, (n, n), 'a2')
    b2 = decode_matrix(_require(doc, 'b2'), 'b2')
    m = b2.shape[1]
    _check_shape(b2, (n, m), 'b2')
    system = _build('system', AntilinearSystem, a2, b2)
    return AntilinearProblem(system, _parse_weights(doc, n, m), _parse_x0(doc, n))


def parse_delay_problem(doc: dict) -> DelayProblem:
    """ keys: a0, ad, g, q0, r0 (real matrices), xi0, xim1 (real vectors, optional) """
    a0 = decode_matrix(_require(doc, 'a0'), 'a0', real=True)
    n = a0.shape[0]
    _check_shape(a0, (n, n), 'a0')
    ad = decode_matrix(_require(doc, 'ad'), 'ad', real=True)
    _check_shape(ad, (n, n), 'ad')
    g = decode_matrix(_require(doc, 'g'), 'g', real=True)
    p = g.shape[1]
    _check_shape(g, (n, p), 'g')
    q0 = decode_matrix(_require(doc, 'q0'), 'q0', real=True)
    _check_shape(q0, (n, n), 'q0')
    r0 = decode_matrix(_require(doc, 'r0'), 'r0', real=True)
    _check_shape(r0, (p, p), 'r0')
    try:
        system = DelaySystem(a0, ad, g, q0, r0)
    except BiLQRError as err:
        raise InputError('q0' if 'q0' in str(err) else 'r0', str(err)) from err
    ic = None
    if 'xi0' in doc or 'xim1' in doc:
        xi0 = decode_vector(_require(doc, 'xi0'), 'xi0', real=True)
        xim1 = decode_vector(_require(doc, 'xim1'), 'xim1', real=True)
        _check_length(xi0, n, 'xi0')
        _check_length(xim1, n, 'xim1')
        ic = DelayInitialCondition(xi0, xim1)
    return DelayProblem(system, ic)


_PARSERS = {'complex': parse_complex_problem,
            'antilinear': parse_antilinear_problem,
            'delay': parse_delay_problem,
            }


def parse_problem(doc: dict, kind: str | None = None):
    """ Dispatch on doc['kind']; `kind` demands a specific kind """
    doc_kind = _require(doc, 'kind')
    if doc_kind not in KINDS:
        raise InputError('kind', f'must be one of {", ".join(KINDS)}, got {doc_kind!r}')
    if kind is not None and doc_kind != kind:
        raise InputError('kind', f'expected {kind!r}, got {doc_kind!r}')
    return _PARSERS[doc_kind](doc)


def load_problem(filename, kind: str | None = None):
    return parse_problem(from_json(filename), kind)


_OPTION_KEYS = ('tol', 'max_iter', 'divergence_bound', 'method', 'horizon')


def parse_options(doc: dict, tol=None, max_iter=None, method=None, horizon=None,
                  record_trace=False) -> tuple[SolverOptions, str, int | None]:
    """ Merge the document's options block with command line values.
        Command line wins over the document, the document over the defaults.
    :returns
        opts: SolverOptions
        method: str
        horizon: int or None
    """
    block = doc.get('options', {})
    if not isinstance(block, dict):
        raise InputError('options', 'must be a JSON object')
    for key in block:
        if key not in _OPTION_KEYS:
            raise InputError(f'options.{key}', 'unknown option')
    default = SolverOptions()
    tol = tol if tol is not None else block.get('tol', default.tol)
    max_iter = max_iter if max_iter is not None else block.get('max_iter', default.max_iter)
    bound = block.get('divergence_bound', default.divergence_bound)
    method = method if method is not None else block.get('method', 'all')
    horizon = horizon if horizon is not None else block.get('horizon')
    if method not in METHODS:
        raise InputError('options.method', f'must be one of {", ".join(METHODS)}, got {method!r}')
    if horizon is not None and (not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 0):
        raise InputError('options.horizon', f'must be a nonnegative integer, got {horizon!r}')
    if not isinstance(max_iter, int) or isinstance(max_iter, bool):
        raise InputError('options.max_iter', f'must be an integer, got {max_iter!r}')
    try:
        opts = SolverOptions(tol=float(tol), max_iter=max_iter,
                             divergence_bound=None if bound is None else float(bound),
                             record_trace=record_trace)
    except (TypeError, ValueError) as err:
        raise InputError('options', str(err)) from err
    return opts, method, horizon


@dataclass
class Prefs:
    """ Run preferences collected from the command line """

    debug: bool = False
    verbose: bool = False
    version: str = VERSION
    output: str | None = None
    trace: bool = False
    horizon: int | None = None
    method: str | None = None
    tol: float | None = None
    max_iter: int | None = None
    jobs: int = 1

    @classmethod
    def from_args(cls, args):
        """ Pick the known fields out of an argparse namespace """
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(args).items() if k in names and v is not None})
