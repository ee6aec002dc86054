"""Scenario data model for Poisson signaling games and the PDoS specialization.

Every table is a dense numpy array indexed by the positions of the labels in
the scenario's ordered label tuples:

    detector          (Y, X, M, E)   delta_y(e | x, m)
    receiver_utility  (Y, X, M, A)   U_y^R(x, m, a), decoupled from counts
    sender_weights    (X, M, A)      omega_x^a, payoff per receiver playing a
    prohibited        (Y, A)         action a is never available to type y

Prohibited actions stand in for a payoff of minus infinity. Their numeric
entries in ``receiver_utility`` are ignored, so nothing downstream ever adds
an infinity to a finite number.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

SENDER_TYPES = ("l", "d")
RECEIVER_TYPES = ("k", "o", "v")
MESSAGES = ("p", "w")
EVIDENCE = ("b", "n")
ACTIONS = ("t", "g", "f")

MIRAI_DICTIONARY = ("admin", "888888", "123456", "default", "support")

_ROW_TOL = 1e-9


def _frozen(values, dtype=float) -> np.ndarray:
    try:
        arr = np.array(values, dtype=dtype, copy=True)
    except (TypeError, ValueError):
        # ragged input; kept so validate_scenario can report the bad shape
        arr = np.array(values, dtype=object)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """The full PSG tuple with finite label sets.

    ``offpath_belief`` is the belief over sender types used at information
    sets that Bayes' rule cannot reach. ``None`` means the prior.
    """

    lam: float
    sender_types: tuple[str, ...]
    receiver_types: tuple[str, ...]
    messages: tuple[str, ...]
    evidence: tuple[str, ...]
    actions: tuple[str, ...]
    q_sender: np.ndarray
    q_receiver: np.ndarray
    detector: np.ndarray
    receiver_utility: np.ndarray
    sender_weights: np.ndarray
    prohibited: np.ndarray
    offpath_belief: np.ndarray | None = None

    def __post_init__(self):
        for name in ("sender_types", "receiver_types", "messages", "evidence", "actions"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "lam", float(self.lam))
        for name in ("q_sender", "q_receiver", "detector", "receiver_utility", "sender_weights"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "prohibited", _frozen(self.prohibited, dtype=bool))
        if self.offpath_belief is None:
            object.__setattr__(self, "offpath_belief", self.q_sender)
        else:
            object.__setattr__(self, "offpath_belief", _frozen(self.offpath_belief))

    @property
    def shape(self) -> tuple[int, int, int, int, int]:
        """Sizes (X, Y, M, E, A)."""
        return (len(self.sender_types), len(self.receiver_types), len(self.messages),
                len(self.evidence), len(self.actions))

    def ix(self, kind: str, label: str) -> int:
        """Position of ``label`` in the label set named ``kind``."""
        labels = {
            "x": self.sender_types, "y": self.receiver_types, "m": self.messages,
            "e": self.evidence, "a": self.actions,
        }[kind]
        try:
            return labels.index(label)
        except ValueError:
            raise KeyError(f"unknown {kind} label {label!r}; expected one of {labels}") from None

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class PdosScenario:
    """A Scenario over X={l,d}, Y={k,o,v}, M={p,w}, E={b,n}, A={t,g,f}.

    ``tau_low``, ``tau_high`` and ``password_dictionary`` only drive the
    login-trace generator; the equilibrium math reads the detector directly.
    """

    base: Scenario
    tau_low: int = 5
    tau_high: int = 9
    password_dictionary: tuple[str, ...] = MIRAI_DICTIONARY

    def __post_init__(self):
        object.__setattr__(self, "password_dictionary", tuple(self.password_dictionary))

    # Scalar accessors used throughout the closed-form solver.
    @property
    def lam(self) -> float:
        return self.base.lam

    @property
    def q_d(self) -> float:
        return float(self.base.q_sender[1])

    def q_r(self, y: str) -> float:
        return float(self.base.q_receiver[RECEIVER_TYPES.index(y)])

    def delta(self, y: str, e: str, x: str, m: str = "p") -> float:
        b = self.base
        return float(b.detector[b.ix("y", y), b.ix("x", x), b.ix("m", m), b.ix("e", e)])

    def u_r(self, y: str, x: str, a: str, m: str = "p") -> float:
        b = self.base
        return float(b.receiver_utility[b.ix("y", y), b.ix("x", x), b.ix("m", m), b.ix("a", a)])

    def omega(self, x: str, a: str, m: str = "p") -> float:
        b = self.base
        return float(b.sender_weights[b.ix("x", x), b.ix("m", m), b.ix("a", a)])

    def replace(self, **changes) -> "PdosScenario":
        return dataclasses.replace(self, **changes)

    def with_base(self, **changes) -> "PdosScenario":
        return dataclasses.replace(self, base=self.base.replace(**changes))


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Sender rows sigma_x^S(m) of shape (X, M); receiver rows
    sigma_y^R(a | m, e) of shape (Y, M, E, A)."""

    sender: np.ndarray
    receiver: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sender", _frozen(self.sender))
        object.__setattr__(self, "receiver", _frozen(self.receiver))

    def replace(self, **changes) -> "StrategyProfile":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class BeliefTable:
    """Posteriors mu_y^R(x | m, e), shape (Y, M, E, X)."""

    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", _frozen(self.mu))


@dataclass(frozen=True)
class ActionCount:
    """Number of receivers c_a playing each action."""

    actions: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.actions) != len(self.counts):
            raise ValueError("actions and counts differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError("action counts must be non-negative")

    def __getitem__(self, a: str) -> int:
        return self.counts[self.actions.index(a)]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.actions, self.counts))


@dataclass(frozen=True)
class Violation:
    """One failed scenario invariant."""

    code: str
    message: str
    where: tuple = field(default=())

    def __str__(self):
        return f"[{self.code}] {self.message}"


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

def _expected_shapes(s: Scenario) -> dict[str, tuple[int, ...]]:
    nx, ny, nm, ne, na = s.shape
    return {
        "q_sender": (nx,), "q_receiver": (ny,), "detector": (ny, nx, nm, ne),
        "receiver_utility": (ny, nx, nm, na), "sender_weights": (nx, nm, na),
        "prohibited": (ny, na), "offpath_belief": (nx,),
    }


def _check_distribution(name, row, where, strict_positive=False) -> list[Violation]:
    out = []
    if not np.all(np.isfinite(row)):
        return [Violation("nonfinite", f"{name} has non-finite entries", where)]
    total = float(np.sum(row))
    if abs(total - 1.0) > _ROW_TOL:
        out.append(Violation("row-sum", f"{name} sums to {total:.12g}", where))
    if strict_positive and np.any(row <= 0):
        out.append(Violation("positivity", f"{name} has entries <= 0", where))
    elif np.any(row < 0) or np.any(row > 1):
        out.append(Violation("range", f"{name} has entries outside [0, 1]", where))
    return out


def validate_scenario(s: Scenario | PdosScenario, *, symmetric: bool = False) -> list[Violation]:
    """Return every violated invariant; an empty list means the scenario is valid.

    A PdosScenario is additionally checked against characteristics C1-C5, the
    detector ordering and the sign conventions on the malicious sender's
    weights. ``symmetric=True`` also requires identical trust utilities across
    receiver types and identical detectors for types o and v.
    """
    if isinstance(s, PdosScenario):
        return _validate_base(s.base) + _validate_pdos(s, symmetric)
    return _validate_base(s)


def _validate_base(s: Scenario) -> list[Violation]:
    out: list[Violation] = []
    try:
        lam = float(s.lam)
    except (TypeError, ValueError):
        lam = math.nan
    if not (math.isfinite(lam) and lam > 0):
        out.append(Violation("lambda", f"lambda must be a positive finite number, got {s.lam!r}"))

    ok_shapes = True
    for name, shape in _expected_shapes(s).items():
        arr = np.asarray(getattr(s, name))
        if arr.shape != shape:
            out.append(Violation("shape", f"{name} has shape {arr.shape}, expected {shape}", (name,)))
            ok_shapes = False
    if not ok_shapes:
        return out

    out += _check_distribution("q_sender", s.q_sender, ("q_sender",))
    out += _check_distribution("q_receiver", s.q_receiver, ("q_receiver",), strict_positive=True)
    out += _check_distribution("offpath_belief", s.offpath_belief, ("offpath_belief",))
    for iy, y in enumerate(s.receiver_types):
        for ix_, x in enumerate(s.sender_types):
            for im, m in enumerate(s.messages):
                out += _check_distribution(
                    f"detector row delta_{y}(.|{x},{m})", s.detector[iy, ix_, im], ("detector", y, x, m))

    allowed = ~s.prohibited[:, None, None, :]
    bad_u = allowed & ~np.isfinite(s.receiver_utility)
    for iy, ix_, im, ia in zip(*np.nonzero(bad_u)):
        out.append(Violation(
            "nonfinite", "receiver utility U_{}^R({},{},{}) is not finite".format(
                s.receiver_types[iy], s.sender_types[ix_], s.messages[im], s.actions[ia]),
            ("receiver_utility", s.receiver_types[iy], s.sender_types[ix_], s.messages[im], s.actions[ia])))
    for ix_, im, ia in zip(*np.nonzero(~np.isfinite(s.sender_weights))):
        out.append(Violation(
            "nonfinite", f"sender weight omega_{s.sender_types[ix_]}^{s.actions[ia]} "
            f"(m={s.messages[im]}) is not finite",
            ("sender_weights", s.sender_types[ix_], s.messages[im], s.actions[ia])))
    for iy in np.nonzero(s.prohibited.all(axis=1))[0]:
        out.append(Violation("prohibited", f"every action is prohibited for {s.receiver_types[iy]}",
                             ("prohibited", s.receiver_types[iy])))
    return out


def _validate_pdos(ps: PdosScenario, symmetric: bool) -> list[Violation]:
    s = ps.base
    out: list[Violation] = []
    labels = (s.sender_types, s.receiver_types, s.messages, s.evidence, s.actions)
    if labels != (SENDER_TYPES, RECEIVER_TYPES, MESSAGES, EVIDENCE, ACTIONS):
        return [Violation("labels", f"PDoS label sets must be {SENDER_TYPES}, {RECEIVER_TYPES}, "
                                    f"{MESSAGES}, {EVIDENCE}, {ACTIONS}")]
    if any(v.code in ("shape", "nonfinite") for v in _validate_base(s)):
        return out

    if not (isinstance(ps.tau_low, int) and isinstance(ps.tau_high, int)
            and 0 < ps.tau_low <= ps.tau_high):
        out.append(Violation("tau", f"need integers 0 < tau_low <= tau_high, got "
                                    f"{ps.tau_low!r}, {ps.tau_high!r}"))

    w, p = 1, 0
    # C1: not persisting pays nothing to anyone.
    if np.any(s.sender_weights[:, w, :] != 0):
        out.append(Violation("C1", "sender weights for m=w must all be 0", ("sender_weights", "w")))
    if np.any(np.where(s.prohibited[:, None, :], 0.0, s.receiver_utility[:, :, w, :]) != 0):
        out.append(Violation("C1", "receiver utilities for m=w must all be 0", ("receiver_utility", "w")))
    # C2
    for y in RECEIVER_TYPES:
        for x in SENDER_TYPES:
            if ps.u_r(y, x, "g") != 0:
                out.append(Violation("C2", f"U_{y}^R({x},p,g) = {ps.u_r(y, x, 'g'):g}, must be 0",
                                     ("receiver_utility", y, x, "p", "g")))
    # C3
    for y in RECEIVER_TYPES:
        if not ps.u_r(y, "d", "t") < 0 < ps.u_r(y, "l", "t"):
            out.append(Violation("C3", f"need U_{y}^R(d,p,t) < 0 < U_{y}^R(l,p,t)",
                                 ("receiver_utility", y, "p", "t")))
    # C4
    ia_f = s.ix("a", "f")
    for y in ("k", "o"):
        if not s.prohibited[s.ix("y", y), ia_f]:
            out.append(Violation("C4", f"action f must be prohibited for type {y}", ("prohibited", y)))
    if s.prohibited[s.ix("y", "v"), ia_f]:
        out.append(Violation("C4", "action f must be available to type v", ("prohibited", "v")))
    # C5
    if not ps.u_r("v", "l", "f") < 0 < ps.u_r("v", "d", "f"):
        out.append(Violation("C5", "need U_v^R(l,p,f) < 0 < U_v^R(d,p,f)", ("receiver_utility", "v", "p", "f")))

    for y in ("o", "v"):
        if not ps.delta(y, "b", "d") > ps.delta(y, "b", "l"):
            out.append(Violation("detector-order", f"need delta_{y}(b|d,p) > delta_{y}(b|l,p)", ("detector", y)))
    if ps.delta("k", "b", "d") != ps.delta("k", "b", "l"):
        out.append(Violation("detector-order", "type k has no detector: need delta_k(b|d,p) = delta_k(b|l,p)",
                             ("detector", "k")))

    if not ps.omega("d", "t") > 0:
        out.append(Violation("omega", "need omega_d^t > 0", ("sender_weights", "d", "t")))
    for a in ("g", "f"):
        if not ps.omega("d", a) < 0:
            out.append(Violation("omega", f"need omega_d^{a} < 0", ("sender_weights", "d", a)))

    if symmetric:
        for x in SENDER_TYPES:
            vals = [ps.u_r(y, x, "t") for y in RECEIVER_TYPES]
            if len(set(vals)) != 1:
                out.append(Violation("symmetry", f"U_y^R({x},p,t) differs across receiver types: {vals}",
                                     ("receiver_utility", x, "t")))
            for e in EVIDENCE:
                if ps.delta("o", e, x) != ps.delta("v", e, x):
                    out.append(Violation("symmetry", f"delta_o({e}|{x},p) != delta_v({e}|{x},p)",
                                         ("detector", e, x)))
    return out


# --------------------------------------------------------------------------
# Construction
# --------------------------------------------------------------------------

def pdos_scenario(
    *,
    lam: float,
    q_d: float,
    q_receiver: Mapping[str, float],
    detector_b: Mapping[str, tuple[float, float]],
    trust_utility: Mapping[str, tuple[float, float]],
    defense_utility: tuple[float, float],
    omega_d: Mapping[str, float],
    omega_l: Mapping[str, float] | None = None,
    detector_n: Mapping[str, tuple[float, float]] | None = None,
    offpath_belief_d: float = 1.0,
    tau_low: int = 5,
    tau_high: int = 9,
    password_dictionary: Sequence[str] = MIRAI_DICTIONARY,
) -> PdosScenario:
    """Build a PdosScenario from named PDoS parameters.

    ``detector_b[y] = (delta_y(b|l,p), delta_y(b|d,p))``; the n entries default
    to the complements. ``trust_utility[y] = (U_y^R(l,p,t), U_y^R(d,p,t))`` and
    ``defense_utility = (U_v^R(l,p,f), U_v^R(d,p,f))``. Messages w carry zero
    payoff and the detector behaves identically under w and p.
    """
    X, Y, M, E, A = SENDER_TYPES, RECEIVER_TYPES, MESSAGES, EVIDENCE, ACTIONS
    detector = np.zeros((3, 2, 2, 2))
    for iy, y in enumerate(Y):
        for ix_ in range(2):
            b = float(detector_b[y][ix_])
            n = 1.0 - b if detector_n is None or y not in detector_n else float(detector_n[y][ix_])
            detector[iy, ix_, :, 0] = b
            detector[iy, ix_, :, 1] = n

    utility = np.zeros((3, 2, 2, 3))
    for iy, y in enumerate(Y):
        utility[iy, 0, 0, 0], utility[iy, 1, 0, 0] = trust_utility[y]
    utility[2, 0, 0, 2], utility[2, 1, 0, 2] = defense_utility

    prohibited = np.zeros((3, 3), dtype=bool)
    prohibited[0, 2] = prohibited[1, 2] = True

    weights = np.zeros((2, 2, 3))
    omega_l = omega_l or {}
    for ia, a in enumerate(A):
        weights[0, 0, ia] = float(omega_l.get(a, 0.0))
        weights[1, 0, ia] = float(omega_d[a])

    base = Scenario(
        lam=lam, sender_types=X, receiver_types=Y, messages=M, evidence=E, actions=A,
        q_sender=[1.0 - q_d, q_d], q_receiver=[q_receiver[y] for y in Y],
        detector=detector, receiver_utility=utility, sender_weights=weights,
        prohibited=prohibited, offpath_belief=[1.0 - offpath_belief_d, offpath_belief_d],
    )
    return PdosScenario(base, tau_low, tau_high, tuple(password_dictionary))


def pdos_params(ps: PdosScenario) -> dict:
    """Inverse of :func:`pdos_scenario` (n entries of the detector included)."""
    return dict(
        lam=ps.lam,
        q_d=ps.q_d,
        q_receiver={y: ps.q_r(y) for y in RECEIVER_TYPES},
        detector_b={y: (ps.delta(y, "b", "l"), ps.delta(y, "b", "d")) for y in RECEIVER_TYPES},
        detector_n={y: (ps.delta(y, "n", "l"), ps.delta(y, "n", "d")) for y in RECEIVER_TYPES},
        trust_utility={y: (ps.u_r(y, "l", "t"), ps.u_r(y, "d", "t")) for y in RECEIVER_TYPES},
        defense_utility=(ps.u_r("v", "l", "f"), ps.u_r("v", "d", "f")),
        omega_d={a: ps.omega("d", a) for a in ACTIONS},
        omega_l={a: ps.omega("l", a) for a in ACTIONS},
        offpath_belief_d=float(ps.base.offpath_belief[1]),
        tau_low=ps.tau_low,
        tau_high=ps.tau_high,
        password_dictionary=ps.password_dictionary,
    )


def modify_pdos(ps: PdosScenario, **changes) -> PdosScenario:
    """Rebuild ``ps`` with some named parameters replaced (see :func:`pdos_scenario`)."""
    params = pdos_params(ps)
    if "detector_b" in changes and "detector_n" not in changes:
        params.pop("detector_n")  # new b rows get complementary n rows
    params.update(changes)
    return pdos_scenario(**params)


def canonical_pdos() -> PdosScenario:
    """The repository's reference fixture."""
    return pdos_scenario(
        lam=100,
        q_d=0.3,
        q_receiver={"k": 0.5, "o": 0.3, "v": 0.2},
        detector_b={"k": (0.0, 0.0), "o": (0.1, 0.9), "v": (0.1, 0.9)},
        trust_utility={y: (1.0, -1.0) for y in RECEIVER_TYPES},
        defense_utility=(-1.0, 2.0),
        omega_d={"t": 1.0, "g": -0.5, "f": -6.0},
        tau_low=5,
        tau_high=9,
        password_dictionary=MIRAI_DICTIONARY,
    )


# --------------------------------------------------------------------------
# Strategy helpers
# --------------------------------------------------------------------------

def validate_profile(s: Scenario, profile: StrategyProfile, tol: float = 1e-9) -> list[str]:
    """Problems with a strategy profile (row normalization, prohibited mass)."""
    nx, ny, nm, ne, na = s.shape
    problems = []
    if profile.sender.shape != (nx, nm):
        problems.append(f"sender table has shape {profile.sender.shape}, expected {(nx, nm)}")
    if profile.receiver.shape != (ny, nm, ne, na):
        problems.append(f"receiver table has shape {profile.receiver.shape}, expected {(ny, nm, ne, na)}")
    if problems:
        return problems
    for table, name in ((profile.sender, "sender"), (profile.receiver, "receiver")):
        if np.any(table < -tol) or not np.all(np.isfinite(table)):
            problems.append(f"{name} table has negative or non-finite entries")
        bad = np.abs(table.sum(axis=-1) - 1.0) > tol
        if np.any(bad):
            problems.append(f"{name} table has {int(bad.sum())} rows not summing to 1")
    mass = profile.receiver * s.prohibited[:, None, None, :]
    if np.any(mass > tol):
        problems.append("receiver strategy puts mass on a prohibited action")
    return problems


def pure_receiver_table(s: Scenario, choice: Mapping[tuple[str, str, str], str], default: str) -> np.ndarray:
    """Receiver table where each (y, m, e) plays ``choice.get((y, m, e), default)``."""
    ny, nm, ne, na = s.shape[1:]
    table = np.zeros((ny, nm, ne, na))
    for iy, y in enumerate(s.receiver_types):
        for im, m in enumerate(s.messages):
            for ie, e in enumerate(s.evidence):
                table[iy, im, ie, s.ix("a", choice.get((y, m, e), default))] = 1.0
    return table


def uniform_profile(s: Scenario, receiver_action: str) -> StrategyProfile:
    """Every sender sends the first message; every receiver plays ``receiver_action``."""
    nx, _, nm, _, _ = s.shape
    sender = np.zeros((nx, nm))
    sender[:, 0] = 1.0
    return StrategyProfile(sender, pure_receiver_table(s, {}, receiver_action))
