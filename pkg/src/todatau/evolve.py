"""Evolution engines for the discrete Toda lattice.

Two coupled pictures are implemented exactly:

* the bilinear tau form
      tau[n][t+1] * tau[n][t-1] = tau[n-1][t+1] * tau[n+1][t-1] + tau[n][t]^2
  under semi-infinite, molecule and periodic boundaries, over Laurent
  polynomials (symbolic mode) or exact rationals (numeric mode);

* the nonlinear conserved-form variables
      I[n][t+1] = I[n][t] + V[n][t] - V[n-1][t+1]
      V[n][t+1] = I[n+1][t] * V[n][t] / I[n][t+1]
  with the dictionary
      I[n][t] = tau[n-1][t] tau[n][t+1] / (tau[n][t] tau[n-1][t+1])
      V[n][t] = tau[n+1][t] tau[n-1][t+1] / (tau[n][t] tau[n][t+1]).

Periodic grids are evolved in rescaled coordinates where every iterate is a
genuine Laurent polynomial; the rescaling exponent is t(t-1)/2 (see
tilde_transform).  Symbolic divisions must be exact: a failed division is the
signal the whole package exists to detect, and is raised with coordinates,
never rationalized away.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .laurent import DivisionError, LaurentPoly, VarRegistry
from .gcdtools import RationalFunction

Value = Union[LaurentPoly, Fraction]


class BoundaryError(LookupError):
    """A cell outside the stored/computable region was requested."""


class SingularityError(ArithmeticError):
    """A numeric denominator vanished; carries the blocking coordinates."""

    def __init__(self, msg: str, n: Optional[int] = None, t: Optional[int] = None):
        super().__init__(msg)
        self.n = n
        self.t = t


class DegenerateError(ArithmeticError):
    """Periodic nonlinear step undefined: prod(V) equals prod(I)."""


class CellDivisionError(DivisionError):
    """Inexact division while computing a cell; carries coordinates."""

    def __init__(self, n: int, t: int, msg: str = ""):
        super().__init__(msg or "inexact division at cell (n=%d, t=%d)" % (n, t))
        self.n = n
        self.t = t


# ---------------------------------------------------------------------------
# boundary kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemiInfinite:
    """Left wall only: tau[0][t] = 1; initial rows carry n = 1..n_max.

    Row t is computable for n <= n_max - floor(t/2); the triangular region
    thins by one site every two time steps.
    """

    n_max: int

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    def row_width(self, t: int) -> int:
        return self.n_max - t // 2


@dataclass(frozen=True)
class Molecule:
    """Finite chain of size N: tau[0][t] = 1 and tau[N+2][t] = 0."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("molecule size must be >= 1")


@dataclass(frozen=True)
class Periodic:
    """Ring of N sites with the twisted wrap tau[n+N][t] = K lambda^t mu^n tau[n][t]."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError("periodic size must be >= 2")


Boundary = Union[SemiInfinite, Molecule, Periodic]


@dataclass(frozen=True)
class PeriodicConstants:
    """Wrap constants; exact values or invertible symbols."""

    K: Value
    lam: Value
    mu: Value


def tilde_transform(t: int) -> int:
    """Exponent e(t) relating raw and rescaled periodic cells:
    raw = (lambda^2/mu - 1)^(-t(t-1)/2) * rescaled, so e(t) = -t(t-1)/2."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return -(t * (t - 1)) // 2


# ---------------------------------------------------------------------------
# the grid
# ---------------------------------------------------------------------------


class TauGrid:
    """Rows of exact tau values; immutable once a row is sealed.

    Periodic grids store sites n = 0..N-1 in rescaled (pure-Laurent)
    coordinates; value() applies the wrap factor for out-of-range n.  Open
    grids store n = 1..width(t) and synthesize the walls.
    """

    def __init__(self, boundary: Boundary, reg: Optional[VarRegistry],
                 rows: list, constants: Optional[PeriodicConstants] = None,
                 symbolic: bool = True) -> None:
        self.boundary = boundary
        self.reg = reg
        self.rows = rows
        self.constants = constants
        self.symbolic = symbolic
        if isinstance(boundary, Periodic) and constants is None:
            raise ValueError("periodic grids need wrap constants")

    # -- basic shape --------------------------------------------------------

    @property
    def top_time(self) -> int:
        return len(self.rows) - 1

    def width(self, t: int) -> int:
        if not 0 <= t < len(self.rows):
            raise BoundaryError("row t=%d not computed" % t)
        return len(self.rows[t])

    def _one(self) -> Value:
        if self.symbolic:
            assert self.reg is not None
            return LaurentPoly.one(self.reg)
        return Fraction(1)

    def _zero(self) -> Value:
        if self.symbolic:
            assert self.reg is not None
            return LaurentPoly.zero(self.reg)
        return Fraction(0)

    # -- cell access ---------------------------------------------------------

    def value(self, n: int, t: int) -> Value:
        """Boundary-aware cell value; BoundaryError outside the region."""
        if not 0 <= t < len(self.rows):
            raise BoundaryError("row t=%d not computed" % t)
        b = self.boundary
        row = self.rows[t]
        if isinstance(b, Periodic):
            N = b.size
            m, r = divmod(n, N)
            base = row[r]
            if m == 0:
                return base
            return base * self._wrap_factor(m, r, t)
        if n == 0:
            return self._one()
        if isinstance(b, Molecule) and n == b.size + 2:
            return self._zero()
        if 1 <= n <= len(row):
            return row[n - 1]
        raise BoundaryError("cell (n=%d, t=%d) outside the computed region" % (n, t))

    def _wrap_factor(self, m: int, r: int, t: int) -> Value:
        """Multiplier turning the stored cell at site r into site r + m*N."""
        assert isinstance(self.boundary, Periodic) and self.constants is not None
        N = self.boundary.size
        emu = m * r + N * (m * (m - 1)) // 2
        K, lam, mu = self.constants.K, self.constants.lam, self.constants.mu
        if self.symbolic:
            return (K ** m) * (lam ** (m * t)) * (mu ** emu)
        return K ** m * lam ** (m * t) * mu ** emu

    def cells(self) -> Iterable[tuple[int, int, Value]]:
        """Stored cells as (n, t, value); open grids index n from 1, periodic from 0."""
        base = 0 if isinstance(self.boundary, Periodic) else 1
        for t, row in enumerate(self.rows):
            for i, v in enumerate(row):
                yield base + i, t, v

    # -- division with coordinates -------------------------------------------

    def _div(self, num: Value, den: Value, n: int, t: int) -> Value:
        if self.symbolic:
            try:
                return num.exact_div(den)  # type: ignore[union-attr]
            except ZeroDivisionError:
                raise SingularityError(
                    "zero tau divisor at cell (n=%d, t=%d)" % (n, t), n, t) from None
            except DivisionError as e:
                raise CellDivisionError(n, t, "%s at cell (n=%d, t=%d)"
                                        % (e, n, t)) from e
        if den == 0:
            raise SingularityError("zero tau divisor at cell (n=%d, t=%d)"
                                   % (n, t), n, t)
        return num / den


# ---------------------------------------------------------------------------
# grid constructors
# ---------------------------------------------------------------------------


def semi_symbolic(n_max: int, x1_is_one: bool = True) -> TauGrid:
    """Semi-infinite grid seeded with fresh initial-row variables.

    x1_is_one pins tau[1][0] = 1, the normalization under which the
    nonlinear-variable dictionary takes its standard small values; it is a
    multiplication of every cell by a monomial, so Laurentness, coprimeness
    and irreducibility are unaffected.
    """
    boundary = SemiInfinite(n_max)
    reg = VarRegistry()
    row0: list[Value] = []
    for n in range(1, n_max + 1):
        if n == 1 and x1_is_one:
            continue
        reg.add_var("x%d" % n, role="tau0")
    for n in range(1, n_max + 1):
        reg.add_var("y%d" % n, role="tau1")
    for n in range(1, n_max + 1):
        if n == 1 and x1_is_one:
            row0.append(LaurentPoly.one(reg))
        else:
            row0.append(LaurentPoly.var(reg, reg.var_id("x%d" % n)))
    row1: list[Value] = [LaurentPoly.var(reg, reg.var_id("y%d" % n))
                         for n in range(1, n_max + 1)]
    return TauGrid(boundary, reg, [row0, row1])


def semi_from_values(tau0: Sequence, tau1: Sequence) -> TauGrid:
    if len(tau0) != len(tau1) or not tau0:
        raise ValueError("initial rows must be nonempty and equal length")
    boundary = SemiInfinite(len(tau0))
    row0 = [Fraction(v) for v in tau0]
    row1 = [Fraction(v) for v in tau1]
    return TauGrid(boundary, None, [row0, row1], symbolic=False)


def molecule_symbolic(size: int) -> TauGrid:
    """Molecule grid of size N: variables for n = 1..N+1 on both initial rows."""
    boundary = Molecule(size)
    reg = VarRegistry()
    for n in range(1, size + 2):
        reg.add_var("x%d" % n, role="tau0")
    for n in range(1, size + 2):
        reg.add_var("y%d" % n, role="tau1")
    row0: list[Value] = [LaurentPoly.var(reg, reg.var_id("x%d" % n))
                         for n in range(1, size + 2)]
    row1: list[Value] = [LaurentPoly.var(reg, reg.var_id("y%d" % n))
                         for n in range(1, size + 2)]
    return TauGrid(boundary, reg, [row0, row1])


def molecule_from_values(size: int, tau0: Sequence, tau1: Sequence) -> TauGrid:
    if len(tau0) != size + 1 or len(tau1) != size + 1:
        raise ValueError("molecule rows carry n = 1..N+1")
    boundary = Molecule(size)
    row0 = [Fraction(v) for v in tau0]
    row1 = [Fraction(v) for v in tau1]
    return TauGrid(boundary, None, [row0, row1], symbolic=False)


def periodic_symbolic(size: int) -> TauGrid:
    """Periodic grid over the ring of invertible initial symbols.

    Free variables: a_n = tau[n][0] for 2 <= n <= N-1, b_n = tau[n][1] for
    1 <= n <= N-1, and the wrap constants K, lambda, mu.  The remaining seeds
    are pinned: tau[0][0] = tau[1][0] = tau[0][1] = 1, and the wrap supplies
    tau[N][0] = K, tau[N][1] = K*lambda.
    """
    boundary = Periodic(size)
    reg = VarRegistry()
    for n in range(2, size):
        reg.add_var("a%d" % n, role="tau0")
    for n in range(1, size):
        reg.add_var("b%d" % n, role="tau1")
    kid = reg.add_var("K", role="constant")
    lid = reg.add_var("lam", role="constant")
    mid = reg.add_var("mu", role="constant")
    one = LaurentPoly.one(reg)
    row0: list[Value] = [one, one] + [LaurentPoly.var(reg, reg.var_id("a%d" % n))
                                      for n in range(2, size)]
    row1: list[Value] = [one] + [LaurentPoly.var(reg, reg.var_id("b%d" % n))
                                 for n in range(1, size)]
    constants = PeriodicConstants(LaurentPoly.var(reg, kid),
                                  LaurentPoly.var(reg, lid),
                                  LaurentPoly.var(reg, mid))
    return TauGrid(boundary, reg, [row0, row1], constants=constants)


def periodic_special_x(size: int) -> TauGrid:
    """One-parameter periodic grid: a_n = b_n = 1, K = lambda = 1, mu = 1/x.

    This is the nonlinear data I_n = 1 everywhere, V_n = 1 except V_N = 1/x;
    the wrap weight lambda^2/mu becomes x.  Substituting x = 1 afterwards
    probes the degenerate ring where prod(V) = prod(I).
    """
    boundary = Periodic(size)
    reg = VarRegistry()
    xid = reg.add_var("x", role="constant")
    one = LaurentPoly.one(reg)
    row0: list[Value] = [one] * size
    row1: list[Value] = [one] * size
    constants = PeriodicConstants(one, one, LaurentPoly.var(reg, xid, -1))
    return TauGrid(boundary, reg, [row0, row1], constants=constants)


def periodic_from_iv_values(I0: Sequence, V0: Sequence) -> TauGrid:
    """Numeric periodic grid seeded from nonlinear initial data."""
    constants, tau0, tau1 = constants_from_iv(I0, V0)
    boundary = Periodic(len(I0))
    return TauGrid(boundary, None, [tau0, tau1], constants=constants,
                   symbolic=False)


def constants_from_iv(I0: Sequence, V0: Sequence
                      ) -> tuple[PeriodicConstants, list, list]:
    """Wrap constants and the two seed rows determined by nonlinear data.

        K  = prod (V_i I_i)^(N-i)
        mu = prod V_i I_i
        lambda = prod I_i
        tau[n][0] = prod_{i<n} (V_i I_i)^(n-i)
        tau[n][1] = (prod_{i<=n} I_i) * tau[n][0]

    Consistency (checked): tau[N][0] = K and tau[N][1] = K*lambda.
    """
    N = len(I0)
    if len(V0) != N or N < 2:
        raise ValueError("need matching I, V sequences of length N >= 2")
    I = [Fraction(v) for v in I0]
    V = [Fraction(v) for v in V0]
    if any(v == 0 for v in I) or any(v == 0 for v in V):
        raise ValueError("initial nonlinear data must be nonzero")
    K = Fraction(1)
    mu = Fraction(1)
    lam = Fraction(1)
    for i in range(1, N + 1):
        w = V[i - 1] * I[i - 1]
        K *= w ** (N - i)
        mu *= w
        lam *= I[i - 1]
    tau0 = []
    tau1 = []
    for n in range(0, N):
        t0 = Fraction(1)
        for i in range(1, n):
            t0 *= (V[i - 1] * I[i - 1]) ** (n - i)
        t1 = t0 if n >= 1 else Fraction(1)
        for i in range(1, n + 1):
            t1 *= I[i - 1]
        tau0.append(t0)
        tau1.append(t1)
    # wrap consistency at n = N
    tN0 = Fraction(1)
    for i in range(1, N):
        tN0 *= (V[i - 1] * I[i - 1]) ** (N - i)
    assert tN0 == K, "seed row inconsistent with wrap constant"
    return PeriodicConstants(K, lam, mu), tau0, tau1


# ---------------------------------------------------------------------------
# bilinear stepping
# ---------------------------------------------------------------------------


RULES = ("standard", "cubed", "shifted")


def step_bilinear_open(grid: TauGrid, rule: str = "standard") -> TauGrid:
    """Append one row to a semi-infinite or molecule grid.

    Left-to-right sweep of
        tau[n][t+1] = (tau[n-1][t+1] tau[n+1][t-1] + S) / tau[n][t-1]
    where S depends on the rule: "standard" uses tau[n][t]^2 (the integrable
    lattice), "cubed" uses tau[n][t]^3 (a homogeneous power variant; its
    divisions stay exact because the cube recreates the divisor's additive
    shape), "shifted" uses tau[n][t]^2 + 1 (an inhomogeneous deformation
    that loses exactness, the detector's negative control).
    """
    if isinstance(grid.boundary, Periodic):
        raise ValueError("open stepping on a periodic grid")
    if rule not in RULES:
        raise ValueError("unknown rule %r" % (rule,))
    t = grid.top_time
    if isinstance(grid.boundary, SemiInfinite):
        new_width = grid.boundary.row_width(t + 1)
        if new_width < 1:
            raise BoundaryError("region exhausted at t=%d" % (t + 1))
    else:
        new_width = grid.boundary.size + 1
    new_row: list[Value] = []
    for n in range(1, new_width + 1):
        left = new_row[n - 2] if n >= 2 else grid._one()
        up_right = grid.value(n + 1, t - 1)
        mid = grid.value(n, t)
        power = mid.square() if grid.symbolic else mid * mid
        if rule == "cubed":
            power = power * mid
        elif rule == "shifted":
            power = power + 1
        num = left * up_right + power
        new_row.append(grid._div(num, grid.value(n, t - 1), n, t + 1))
    grid.rows.append(new_row)
    return grid


def _weight(grid: TauGrid) -> Value:
    """Wrap weight w = lambda^2 / mu (an invertible monomial symbolically)."""
    lam, mu = grid.constants.lam, grid.constants.mu
    if grid.symbolic:
        return (lam * lam).exact_div(mu)
    return lam * lam / mu


def step_bilinear_periodic_tilde(grid: TauGrid, verify_wrap: bool = True) -> TauGrid:
    """Append one row to a periodic grid in rescaled coordinates.

    The row is closed by the summation formula
        tau[0][t+1] = tau[1][t-1] * [ w*rho_0 + rho_1 + ... + rho_{N-1} ]
        rho_j = tau[j][t]^2 / (tau[j][t-1] tau[j+1][t-1]),   w = lambda^2/mu
    assembled over the common denominator prod_j tau[j][t-1] and then
    exact-divided (the three-term recurrence alone cannot close the period:
    its leftmost cell would need another cell of the same new row).  The
    remaining cells follow by the recurrence, and the wrap edge is certified
    by a zero bilinear residual, so the whole row provably satisfies the
    periodic system.  A failed division carries the blocking coordinates.
    """
    b = grid.boundary
    if not isinstance(b, Periodic):
        raise ValueError("periodic stepping on a non-periodic grid")
    N = b.size
    t = grid.top_time
    s = [grid.value(j, t) for j in range(N)]
    r = [grid.value(j, t - 1) for j in range(N)]
    # the wrap duplicates site 0: r_N = c * r_0 with c invertible
    c = grid._wrap_factor(1, 0, t - 1)
    w = _weight(grid)
    squares = [v.square() if grid.symbolic else v * v for v in s]

    def chain(head: Value, factors) -> Value:
        # one small factor at a time: never multiplies two large operands
        for f in factors:
            head = head * f
        return head

    def weighted(sq: Value) -> Value:
        return w * sq - sq

    # seed numerator over common denominator c * r_0^2 * r_1 ... r_{N-1},
    # with one copy of r_0 already cancelled against every term:
    #   M = w*c*s_0^2 * prod(r[2..N-1])
    #     + sum_{j=1}^{N-2} c*r_0*s_j^2 * prod(r[1..N-1] minus {j, j+1})
    #     + s_{N-1}^2 * prod(r[1..N-2])
    #   tau[0][t+1] = M / (c * r_0 * prod(r[2..N-1]))
    M = chain(w * (c * squares[0]), (r[k] for k in range(2, N)))
    for j in range(1, N - 1):
        term = chain(c * squares[j],
                     (r[k] for k in range(1, N) if k not in (j, j + 1)))
        M = M + term * r[0]
    M = M + chain(squares[N - 1], (r[k] for k in range(1, N - 1)))
    seed = grid._div(M, c * r[0], 0, t + 1)
    for k in range(2, N):
        seed = grid._div(seed, r[k], 0, t + 1)

    new_row: list[Value] = [seed]
    for n in range(1, N):
        right = (c * r[0]) if n + 1 == N else r[n + 1]
        num = new_row[n - 1] * right + weighted(squares[n])
        new_row.append(grid._div(num, r[n], n, t + 1))

    if verify_wrap:
        # bilinear residual at the wrap edge n = N, all cells via the wrap
        c_new = grid._wrap_factor(1, 0, t + 1)
        c_mid = grid._wrap_factor(1, 0, t)
        c_up = grid._wrap_factor(1, 1, t - 1)
        lhs = (c_new * new_row[0]) * (c * r[0])
        rhs = new_row[N - 1] * (c_up * r[1]) + weighted((c_mid * c_mid) * squares[0])
        if lhs != rhs:
            raise AssertionError("wrap closure residual nonzero at t=%d" % (t + 1))

    grid.rows.append(new_row)
    return grid


def _step_periodic_reference(grid: TauGrid) -> TauGrid:
    """Every cell from the summation formula over the full common denominator.

    Quadratically more division work than the production step; kept as an
    independent cross-check for small windows.
    """
    b = grid.boundary
    assert isinstance(b, Periodic)
    N = b.size
    t = grid.top_time
    s = [grid.value(j, t) for j in range(N)]
    r = [grid.value(j, t - 1) for j in range(N + 1)]
    one = grid._one()
    prefix = [one]
    for i in range(N + 1):
        prefix.append(prefix[-1] * r[i])
    suffix = [one] * (N + 2)
    for i in range(N, -1, -1):
        suffix[i] = r[i] * suffix[i + 1]
    blocks = []
    for j in range(N):
        sq = s[j].square() if grid.symbolic else s[j] * s[j]
        blocks.append(sq * (prefix[j] * suffix[j + 2]))
    w = _weight(grid)
    num = w * blocks[0]
    for j in range(1, N):
        num = num + blocks[j]
    new_row: list[Value] = []
    for n in range(N):
        if n > 0:
            num = num + (w * blocks[n] - blocks[n])
        q = num
        for k in range(N + 1):
            if k != n + 1:
                q = grid._div(q, r[k], n, t + 1)
        new_row.append(q)
    grid.rows.append(new_row)
    return grid


def evolve(grid: TauGrid, steps: int, rule: str = "standard") -> TauGrid:
    """Append `steps` rows using the boundary-appropriate stepper."""
    for _ in range(steps):
        if isinstance(grid.boundary, Periodic):
            if rule != "standard":
                raise ValueError("variant rules are open-boundary only")
            step_bilinear_periodic_tilde(grid)
        else:
            step_bilinear_open(grid, rule=rule)
    return grid


# ---------------------------------------------------------------------------
# nonlinear variables
# ---------------------------------------------------------------------------


@dataclass
class IVRows:
    """One time level: I[n] at index n-1 (n = 1..), V[n] at index n (n = 0..).

    Open boundaries keep V[0] = 0 (and molecule also V[N+1] = 0); periodic
    levels store exactly N entries each and index modulo N.
    """

    I: list
    V: list


class IVState:
    """Time-indexed nonlinear variables under a fixed boundary."""

    def __init__(self, boundary: Boundary, levels: list, symbolic: bool) -> None:
        self.boundary = boundary
        self.levels = levels
        self.symbolic = symbolic

    @property
    def top_time(self) -> int:
        return len(self.levels) - 1

    def I(self, n: int, t: int):
        level = self.levels[t]
        if isinstance(self.boundary, Periodic):
            return level.I[(n - 1) % self.boundary.size]
        return level.I[n - 1]

    def V(self, n: int, t: int):
        level = self.levels[t]
        if isinstance(self.boundary, Periodic):
            return level.V[(n - 1) % self.boundary.size]
        return level.V[n]


def iv_state_from_values(boundary: Boundary, I0: Sequence, V0: Sequence) -> IVState:
    """Numeric level-0 state.  Open boundaries: V0 includes the forced wall
    zero at index 0; periodic: both sequences have length N."""
    if isinstance(boundary, Periodic):
        N = boundary.size
        if len(I0) != N or len(V0) != N:
            raise ValueError("periodic level needs N values of I and V")
        return IVState(boundary, [IVRows([Fraction(v) for v in I0],
                                         [Fraction(v) for v in V0])], False)
    I = [Fraction(v) for v in I0]
    V = [Fraction(v) for v in V0]
    if not V or V[0] != 0:
        raise ValueError("open-boundary V row starts with the wall zero")
    if isinstance(boundary, Molecule):
        if len(I) != boundary.size + 1 or len(V) != boundary.size + 2:
            raise ValueError("molecule level carries I[1..N+1], V[0..N+1]")
        if V[-1] != 0:
            raise ValueError("molecule right wall V[N+1] must be 0")
    return IVState(boundary, [IVRows(I, V)], False)


def iv_state_symbolic(grid: TauGrid, t_max: int) -> IVState:
    """Dictionary rows t = 0..t_max read off a symbolic grid.

    The grid must already hold rows through t_max + 1; the state keeps a
    reference to its source grid so consumers can inspect the tau cells
    behind each quotient.
    """
    if not grid.symbolic:
        raise ValueError("symbolic source grid required")
    if grid.top_time < t_max + 1:
        raise ValueError("grid rows end before t_max + 1")
    state = IVState(grid.boundary, [tau_to_iv(grid, t) for t in range(t_max + 1)],
                    True)
    state.source_grid = grid
    return state


def tau_to_iv(grid: TauGrid, t: int) -> IVRows:
    """Dictionary row at time t (needs rows t and t+1).

        I[n][t] = tau[n-1][t] tau[n][t+1] / (tau[n][t] tau[n-1][t+1])
        V[n][t] = tau[n+1][t] tau[n-1][t+1] / (tau[n][t] tau[n][t+1])

    Symbolic cells give reduced RationalFunctions; numeric cells exact
    rationals.  The rescaling of periodic grids cancels in both quotients, so
    the dictionary reads directly off stored cells.
    """
    b = grid.boundary
    if isinstance(b, Periodic):
        N = b.size
        I_row = [_rf_div(grid, grid.value(n - 1, t) * grid.value(n, t + 1),
                         grid.value(n, t) * grid.value(n - 1, t + 1))
                 for n in range(1, N + 1)]
        V_row = [_rf_div(grid, grid.value(n + 1, t) * grid.value(n - 1, t + 1),
                         grid.value(n, t) * grid.value(n, t + 1))
                 for n in range(1, N + 1)]
        return IVRows(I_row, V_row)
    if isinstance(b, SemiInfinite):
        width_I = min(grid.width(t), grid.width(t + 1))
        width_V = min(grid.width(t) - 1, grid.width(t + 1))
    else:
        width_I = b.size + 1
        width_V = b.size + 1
    I_row = []
    for n in range(1, width_I + 1):
        I_row.append(_rf_div(grid, grid.value(n - 1, t) * grid.value(n, t + 1),
                             grid.value(n, t) * grid.value(n - 1, t + 1)))
    V_row: list = [_rf_zero(grid)]
    for n in range(1, width_V + 1):
        V_row.append(_rf_div(grid, grid.value(n + 1, t) * grid.value(n - 1, t + 1),
                             grid.value(n, t) * grid.value(n, t + 1)))
    return IVRows(I_row, V_row)


def _rf_div(grid: TauGrid, num: Value, den: Value):
    if grid.symbolic:
        return RationalFunction.make(num, den)
    if den == 0:
        raise SingularityError("zero tau cell inverted by the dictionary")
    return num / den


def _rf_zero(grid: TauGrid):
    if grid.symbolic:
        assert grid.reg is not None
        return RationalFunction.from_poly(LaurentPoly.zero(grid.reg))
    return Fraction(0)


def _is_zero(v) -> bool:
    if isinstance(v, RationalFunction):
        return v.is_zero()
    return v == 0


def _zero_like(sample):
    if isinstance(sample, RationalFunction):
        return RationalFunction.from_poly(LaurentPoly.zero(sample.num.reg))
    return Fraction(0)


def _one_like(sample):
    if isinstance(sample, RationalFunction):
        return RationalFunction.from_poly(LaurentPoly.one(sample.num.reg))
    return Fraction(1)


def step_iv_open(state: IVState) -> IVState:
    """Append one level to an open-boundary nonlinear state.

    Left-to-right sweep: each new I uses the new V to its left, each new V
    uses the new I just computed.  A vanishing new I blocks the step and
    raises with coordinates.  Semi-infinite levels shrink as the stencil
    consumes the right edge; molecule levels keep both forced wall zeros.
    """
    if isinstance(state.boundary, Periodic):
        raise ValueError("open stepping on a periodic state")
    t = state.top_time
    level = state.levels[t]
    molecule = isinstance(state.boundary, Molecule)
    n_I = len(level.I)          # I[n][t] exists for n = 1..n_I
    n_V = len(level.V) - 1      # V[n][t] exists for n = 0..n_V
    if molecule:
        width_I = n_I                       # n = 1..N+1
        width_V = state.boundary.size       # formula V entries n = 1..N
    else:
        width_I = min(n_I, n_V)
        width_V = min(n_I - 1, n_V)
    new_I: list = []
    new_V: list = [_zero_like(level.V[0])]
    for n in range(1, width_I + 1):
        In = level.I[n - 1] + level.V[n] - new_V[n - 1]
        new_I.append(In)
        if n <= width_V:
            if _is_zero(In):
                raise SingularityError("I[%d][%d] = 0 blocks V[%d][%d]"
                                       % (n, t + 1, n, t + 1), n, t + 1)
            new_V.append(level.I[n] * level.V[n] / In)
    if molecule:
        new_V.append(_zero_like(level.V[0]))
    state.levels.append(IVRows(new_I, new_V))
    return state


def step_iv_periodic(state: IVState) -> IVState:
    """Append one level to a periodic nonlinear state (non-trivial branch).

        Y[n] = (1 - prodV/prodI) / (1 + sum_{k=1}^{N-1} prod_{i<=k} V[n-i]/I[n-i])
        I[n][t+1] = V[n][t] + I[n][t] Y[n]
        V[n][t+1] = I[n+1][t] V[n][t] / I[n][t+1]

    Site indices wrap modulo N.  prod(V) = prod(I) leaves the update
    underdetermined (the excluded constant-shift branch) and raises.
    """
    b = state.boundary
    if not isinstance(b, Periodic):
        raise ValueError("periodic stepping on a non-periodic state")
    N = b.size
    t = state.top_time
    level = state.levels[t]
    I, V = level.I, level.V
    one = _one_like(I[0])
    prod_I = _prod(I, one)
    prod_V = _prod(V, one)
    if prod_I == prod_V:
        raise DegenerateError("prod(V) equals prod(I) at t=%d" % t)
    head = one - prod_V / prod_I
    new_I = []
    new_V = []
    for n0 in range(N):
        total = one
        term = one
        for k in range(1, N):
            idx = (n0 - k) % N
            term = term * V[idx] / I[idx]
            total = total + term
        Y = head / total
        In = V[n0] + I[n0] * Y
        if _is_zero(In):
            raise SingularityError("I[%d][%d] = 0" % (n0 + 1, t + 1), n0 + 1, t + 1)
        new_I.append(In)
        new_V.append(I[(n0 + 1) % N] * V[n0] / In)
    state.levels.append(IVRows(new_I, new_V))
    return state


def _prod(values, one):
    out = one
    for v in values:
        out = out * v
    return out
