# Group presentations accepted by the growth commands, their text grammar,
# the derived invariants and the Tietze reduction for infinite torsion orders

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from src.utils import PresentationSyntaxError, PreconditionError

INFINITY = math.inf


@dataclass(frozen=True)
class Invariants:
    mu: Fraction
    alpha: Fraction
    m_gamma: int
    delta: int

    @property
    def in_growth_class(self) -> bool:
        """alpha > 0, the range where the main term applies."""
        return self.alpha > 0


@dataclass(frozen=True)
class FuchsianPresentation:
    """
    <x_1..x_r, y_1..y_s, u_1, v_1..u_t, v_t |
        x_i^{a_i} = 1, x_1...x_r y_1^{e_1}...y_s^{e_s} [u_1,v_1]...[u_t,v_t] = 1>

    a_i may be INFINITY (no torsion relation on x_i).
    """
    r: int = 0
    s: int = 0
    t: int = 0
    a: tuple = ()
    e: tuple = ()
    label: str = 'fuchsian'

    def __post_init__(self):
        if min(self.r, self.s, self.t) < 0:
            raise PreconditionError("r, s and t must be non-negative")
        if len(self.a) != self.r:
            raise PreconditionError(f"r={self.r} but {len(self.a)} torsion orders given")
        if len(self.e) != self.s:
            raise PreconditionError(f"s={self.s} but {len(self.e)} exponents given")
        for order in self.a:
            if order != INFINITY and (int(order) != order or order < 2):
                raise PreconditionError(f"torsion orders must be integers >= 2 or inf, got {order}")
        for exponent in self.e:
            if int(exponent) != exponent or exponent < 2:
                raise PreconditionError(f"exponents e_j must be integers >= 2, got {exponent}")

    @property
    def finite_a(self) -> tuple:
        return tuple(int(order) for order in self.a if order != INFINITY)

    @property
    def has_infinite_order(self) -> bool:
        return any(order == INFINITY for order in self.a)

    @property
    def is_one_relator(self) -> bool:
        return self.r == 0 and self.t == 0 and self.s >= 1

    def to_string(self) -> str:
        if self.label == 'onerel' and self.is_one_relator:
            return f"onerel(e={','.join(str(x) for x in self.e)})"
        a_text = ','.join('inf' if order == INFINITY else str(order) for order in self.a)
        e_text = ','.join(str(x) for x in self.e)
        text = f"fuchsian(r={self.r};a={a_text};s={self.s}"
        if self.e:
            text += f";e={e_text}"
        return text + f";t={self.t})"


@dataclass(frozen=True)
class DemuskinPresentation:
    """<x_1, y_1..x_d, y_d | x_1^{q-1}[x_1,y_1]...[x_d,y_d] = 1>."""
    q: int
    d: int

    def __post_init__(self):
        if self.q < 1 or self.d < 2:
            raise PreconditionError(f"Demuskin presentation needs q >= 1 and d >= 2, got q={self.q}, d={self.d}")

    def to_string(self) -> str:
        return f"demuskin(q={self.q},d={self.d})"


@dataclass(frozen=True)
class FreeProduct:
    """C_{a_1} * ... * C_{a_k} * F_rank; an order of INFINITY is a free factor."""
    torsion: tuple
    free_rank: int

    def to_string(self) -> str:
        parts = [f"C{order}" for order in self.torsion] + ([f"F{self.free_rank}"] if self.free_rank else [])
        return '*'.join(parts) or 'trivial'


def invariants(gamma: FuchsianPresentation) -> Invariants:
    """mu, alpha, m_Gamma = lcm(a_i) and the parity factor delta."""
    torsion_part = sum(
        (Fraction(1) if order == INFINITY else 1 - Fraction(1, int(order)) for order in gamma.a),
        Fraction(0),
    )
    mu = torsion_part + gamma.s + 2 * (gamma.t - 1)
    alpha = torsion_part + sum((Fraction(2, e) for e in gamma.e), Fraction(0)) + 2 * (gamma.t - 1)

    m_gamma = 1
    for order in gamma.finite_a:
        m_gamma = m_gamma * order // math.gcd(m_gamma, order)

    # Empty conditions count as satisfied
    all_odd = all(order != INFINITY and int(order) % 2 == 1 for order in gamma.a)
    all_even = all(e % 2 == 0 for e in gamma.e)
    delta = 2 if all_odd and all_even else 1

    return Invariants(mu=mu, alpha=alpha, m_gamma=m_gamma, delta=delta)


def reduce_presentation(gamma: FuchsianPresentation) -> FreeProduct:
    """
    Tietze elimination: an x_k of infinite order occurs once in the long relation,
    so solving for it removes that relation. What is left is the free product of the
    remaining cyclic factors with a free group on the y's, u's and v's.
    """
    if not gamma.has_infinite_order:
        raise PreconditionError("reduce_presentation needs at least one infinite torsion order")
    infinite = sum(1 for order in gamma.a if order == INFINITY)
    return FreeProduct(torsion=tuple(sorted(gamma.finite_a)), free_rank=(infinite - 1) + gamma.s + 2 * gamma.t)


# Grammar: fuchsian(r=3; a=2,3,7; s=0; t=0)  onerel(e=3,3)  demuskin(q=5, d=2)

_CALL = re.compile(r'^\s*(fuchsian|onerel|demuskin)\s*\((.*)\)\s*$', re.IGNORECASE)
_SPLIT = re.compile(r';|,(?=\s*[A-Za-z]\w*\s*=)')


def _read_fields(body: str) -> dict:
    fields = {}
    for chunk in _SPLIT.split(body):
        chunk = chunk.strip()
        if not chunk:
            continue
        if '=' not in chunk:
            raise PresentationSyntaxError(f"expected key=value, got {chunk!r}")
        key, value = (piece.strip() for piece in chunk.split('=', 1))
        fields[key.lower()] = value
    return fields


def _read_int(fields: dict, key: str, default=None) -> int:
    if key not in fields:
        if default is None:
            raise PresentationSyntaxError(f"missing field {key}")
        return default
    try:
        return int(fields[key])
    except ValueError:
        raise PresentationSyntaxError(f"{key} must be an integer, got {fields[key]!r}")


def _read_list(fields: dict, key: str, allow_infinity: bool = False) -> tuple:
    raw = fields.get(key, '').replace(' ', '')
    values = []
    for item in (piece for piece in raw.split(',') if piece):
        if allow_infinity and item.lower() in ('inf', 'infinity', '∞'):
            values.append(INFINITY)
            continue
        try:
            values.append(int(item))
        except ValueError:
            raise PresentationSyntaxError(f"{key} entries must be integers, got {item!r}")
    return tuple(values)


def parse_presentation(text: str):
    """
    Read a presentation string

    Returns:
        FuchsianPresentation or DemuskinPresentation
    """
    match = _CALL.match(text or '')
    if not match:
        raise PresentationSyntaxError(f"unrecognised presentation {text!r}")
    kind, fields = match.group(1).lower(), _read_fields(match.group(2))

    try:
        if kind == 'demuskin':
            return DemuskinPresentation(q=_read_int(fields, 'q'), d=_read_int(fields, 'd', default=2))

        if kind == 'onerel':
            e = _read_list(fields, 'e')
            if not e:
                raise PresentationSyntaxError("onerel needs at least one exponent")
            return FuchsianPresentation(r=0, s=len(e), t=0, a=(), e=e, label='onerel')

        a = _read_list(fields, 'a', allow_infinity=True)
        e = _read_list(fields, 'e')
        return FuchsianPresentation(
            r=_read_int(fields, 'r', default=len(a)),
            s=_read_int(fields, 's', default=len(e)),
            t=_read_int(fields, 't', default=0),
            a=a,
            e=e,
        )
    except PreconditionError as exc:
        raise PresentationSyntaxError(str(exc))
