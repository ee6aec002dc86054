"""YAML scenario files.

Layout::

    lambda: 100
    prior:
      sender: {d: 0.3}
      receiver: {k: 0.5, o: 0.3, v: 0.2}
    detector:
      o: {b_given_l_p: 0.1, b_given_d_p: 0.9}   # n_given_{l,d}_p optional
    utility:
      receiver:
        v:
          l: {p: {t: 1, g: 0, f: -1}}
          d: {p: {t: -1, g: 0, f: 2}}
    omega:
      d: {t: 1, g: -0.5, f: -6}
      l: {t: 0, g: 0, f: 0}                     # optional
    tau_low: 5
    tau_high: 9
    dictionary: [admin, "888888", ...]
    offpath_belief_d: 1.0                       # optional

``f`` may be omitted or set to ``prohibited`` for types k and o. Unknown keys
are rejected; every error names the offending key path (or line, for YAML
syntax errors).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from psg_pdos.model import (
    ACTIONS, EVIDENCE, MIRAI_DICTIONARY, RECEIVER_TYPES, SENDER_TYPES, PdosScenario,
    pdos_scenario,
)

PROHIBITED = "prohibited"


class ScenarioFileError(ValueError):
    """A scenario document that cannot be turned into a PdosScenario."""


def _check_keys(node, allowed, where, required=()):
    if not isinstance(node, dict):
        raise ScenarioFileError(f"{where or '<root>'}: expected a mapping, got {type(node).__name__}")
    unknown = [k for k in node if k not in allowed]
    if unknown:
        raise ScenarioFileError(f"{_join(where, unknown[0])}: unknown key "
                                f"(allowed: {', '.join(map(str, allowed))})")
    for k in required:
        if k not in node:
            raise ScenarioFileError(f"{_join(where, k)}: missing required key")


def _join(where, key):
    return f"{where}.{key}" if where else str(key)


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFileError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioFileError(f"{where}: expected an integer, got {value!r}")
    return value


def scenario_from_dict(doc) -> PdosScenario:
    """Build a PdosScenario from a parsed document (not validated against C1-C5)."""
    top = ("lambda", "prior", "detector", "utility", "omega", "tau_low", "tau_high", "dictionary",
           "offpath_belief_d")
    _check_keys(doc, top, "", required=("lambda", "prior", "detector", "utility", "omega"))

    prior = doc["prior"]
    _check_keys(prior, ("sender", "receiver"), "prior", required=("sender", "receiver"))
    _check_keys(prior["sender"], ("d",), "prior.sender", required=("d",))
    q_d = _number(prior["sender"]["d"], "prior.sender.d")
    _check_keys(prior["receiver"], RECEIVER_TYPES, "prior.receiver", required=RECEIVER_TYPES)
    q_r = {y: _number(prior["receiver"][y], f"prior.receiver.{y}") for y in RECEIVER_TYPES}

    det = doc["detector"]
    _check_keys(det, RECEIVER_TYPES, "detector")
    detector_b, detector_n = {}, {}
    for y in RECEIVER_TYPES:
        node = det.get(y, {"b_given_l_p": 0.0, "b_given_d_p": 0.0} if y == "k" else None)
        where = f"detector.{y}"
        if node is None:
            raise ScenarioFileError(f"{where}: missing required key")
        keys = [f"{e}_given_{x}_p" for e in EVIDENCE for x in SENDER_TYPES]
        _check_keys(node, keys, where, required=("b_given_l_p", "b_given_d_p"))
        b = tuple(_number(node[f"b_given_{x}_p"], f"{where}.b_given_{x}_p") for x in SENDER_TYPES)
        detector_b[y] = b
        detector_n[y] = tuple(
            _number(node[f"n_given_{x}_p"], f"{where}.n_given_{x}_p") if f"n_given_{x}_p" in node
            else 1.0 - b[i] for i, x in enumerate(SENDER_TYPES))

    util = doc["utility"]
    _check_keys(util, ("receiver",), "utility", required=("receiver",))
    _check_keys(util["receiver"], RECEIVER_TYPES, "utility.receiver", required=RECEIVER_TYPES)
    table: dict[tuple[str, str, str], float | None] = {}
    for y in RECEIVER_TYPES:
        _check_keys(util["receiver"][y], SENDER_TYPES, f"utility.receiver.{y}", required=SENDER_TYPES)
        for x in SENDER_TYPES:
            where = f"utility.receiver.{y}.{x}"
            _check_keys(util["receiver"][y][x], ("p",), where, required=("p",))
            row = util["receiver"][y][x]["p"]
            _check_keys(row, ACTIONS, where + ".p", required=("t",) + (("f",) if y == "v" else ()))
            for a in ACTIONS:
                v = row.get(a, 0.0 if a == "g" else PROHIBITED)
                table[y, x, a] = None if v == PROHIBITED else _number(v, f"{where}.p.{a}")

    omega = doc["omega"]
    _check_keys(omega, SENDER_TYPES, "omega", required=("d",))
    weights = {}
    for x in SENDER_TYPES:
        node = omega.get(x, {})
        _check_keys(node, ACTIONS, f"omega.{x}", required=ACTIONS if x == "d" else ())
        weights[x] = {a: _number(node.get(a, 0.0), f"omega.{x}.{a}") for a in ACTIONS}

    dictionary = doc.get("dictionary", list(MIRAI_DICTIONARY))
    if not isinstance(dictionary, list) or not all(isinstance(w, (str, int)) for w in dictionary):
        raise ScenarioFileError("dictionary: expected a list of strings")

    def f_or_zero(y, x):
        v = table[y, x, "f"]
        return 0.0 if v is None else v

    ps = pdos_scenario(
        lam=_number(doc["lambda"], "lambda"), q_d=q_d, q_receiver=q_r,
        detector_b=detector_b, detector_n=detector_n,
        trust_utility={y: (table[y, "l", "t"], table[y, "d", "t"]) for y in RECEIVER_TYPES},
        defense_utility=(f_or_zero("v", "l"), f_or_zero("v", "d")),
        omega_d=weights["d"], omega_l=weights["l"],
        offpath_belief_d=_number(doc.get("offpath_belief_d", 1.0), "offpath_belief_d"),
        tau_low=_integer(doc.get("tau_low", 5), "tau_low"),
        tau_high=_integer(doc.get("tau_high", 9), "tau_high"),
        password_dictionary=tuple(str(w) for w in dictionary),
    )
    # Entries the named constructor fixes (g payoffs, f availability) are
    # copied verbatim so the validator sees what the file actually says.
    base = ps.base
    utility = np.array(base.receiver_utility)
    prohibited = np.array(base.prohibited)
    ip = base.ix("m", "p")
    for (y, x, a), v in table.items():
        iy, ix_, ia = base.ix("y", y), base.ix("x", x), base.ix("a", a)
        if v is None:
            if a != "f":
                raise ScenarioFileError(f"utility.receiver.{y}.{x}.p.{a}: only f may be prohibited")
            prohibited[iy, ia] = True
            utility[iy, :, :, ia] = 0.0
        else:
            prohibited[iy, ia] = False
            utility[iy, ix_, ip, ia] = v
    return ps.with_base(receiver_utility=utility, prohibited=prohibited)


def scenario_to_dict(ps: PdosScenario) -> dict:
    """Document form of ``ps``; inverse of :func:`scenario_from_dict` for PDoS scenarios."""
    b = ps.base
    receiver = {}
    for y in RECEIVER_TYPES:
        iy = b.ix("y", y)
        receiver[y] = {}
        for x in SENDER_TYPES:
            row = {}
            for a in ACTIONS:
                row[a] = PROHIBITED if b.prohibited[iy, b.ix("a", a)] else ps.u_r(y, x, a)
            receiver[y][x] = {"p": row}
    detector = {}
    for y in RECEIVER_TYPES:
        node = {f"b_given_{x}_p": ps.delta(y, "b", x) for x in SENDER_TYPES}
        for x in SENDER_TYPES:
            n = ps.delta(y, "n", x)
            if n != 1.0 - ps.delta(y, "b", x):
                node[f"n_given_{x}_p"] = n
        detector[y] = node
    return {
        "lambda": float(ps.lam),
        "prior": {"sender": {"d": ps.q_d}, "receiver": {y: ps.q_r(y) for y in RECEIVER_TYPES}},
        "detector": detector,
        "utility": {"receiver": receiver},
        "omega": {x: {a: ps.omega(x, a) for a in ACTIONS} for x in reversed(SENDER_TYPES)},
        "tau_low": ps.tau_low,
        "tau_high": ps.tau_high,
        "dictionary": list(ps.password_dictionary),
        "offpath_belief_d": float(b.offpath_belief[1]),
    }


def loads(text: str) -> PdosScenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark is not None else ""
        raise ScenarioFileError(f"{where}{getattr(exc, 'problem', None) or exc}") from exc
    return scenario_from_dict(doc)


def dumps(ps: PdosScenario) -> str:
    return yaml.safe_dump(scenario_to_dict(ps), sort_keys=False, default_flow_style=None)


def load_scenario(path: str | Path) -> PdosScenario:
    return loads(Path(path).read_text())


def save_scenario(ps: PdosScenario, path: str | Path) -> None:
    Path(path).write_text(dumps(ps))
