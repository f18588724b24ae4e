"""JSON file formats for networks, codes, assignments, schemes and received words.

Edges are referenced by id in code files so that a code stays readable next
to its network; the network's edge order fixes all matrix indexing.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import FormatError, RobustNCError
from .field import Field, field_from_dict
from .gradient import DataAssignment, GradientCodingScheme, build_network
from .linear_code import STAR, LinearNetworkCode
from .network import Network, validate


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


def read_network(path) -> Network:
    return validate(Network.from_dict(_load_json(path)))


def network_to_dict(net: Network) -> dict:
    return net.to_dict()


def code_to_dict(code: LinearNetworkCode) -> dict:
    net = code.network
    ids = [e.id for e in net.edges]
    src = [[i, j, ids[e], v] for (i, j, e), v in sorted(code.source_coefficients().items())]
    tr = [[ids[d], ids[e], v] for (d, e), v in sorted(code.transfer_coefficients().items())]
    return {"field": code.field.to_dict(), "k": code.k,
            "source_coefficients": src, "transfer_coefficients": tr}


def code_from_dict(d: dict, net: Network) -> LinearNetworkCode:
    try:
        F = field_from_dict(d["field"])
        k = int(d["k"])
        src = {(int(i), int(j), net.index_of(e)): F.coerce(v) for i, j, e, v in d["source_coefficients"]}
        tr = {(net.index_of(a), net.index_of(b)): F.coerce(v) for a, b, v in d["transfer_coefficients"]}
    except RobustNCError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed code description: {exc}") from None
    return LinearNetworkCode.from_coefficients(net, F, k, src, tr)


def read_code(path, net: Network) -> LinearNetworkCode:
    return code_from_dict(_load_json(path), net)


def parse_word(text: str, field: Field) -> tuple:
    """Whitespace or comma separated symbols; '*' marks an erased coordinate."""
    out = []
    for tok in text.replace(",", " ").split():
        if tok == "*":
            out.append(STAR)
            continue
        try:
            out.append(field.coerce(int(tok)))
        except ValueError:
            raise FormatError(f"bad symbol {tok!r} in received word") from None
    return tuple(out)


def format_word(word) -> str:
    return " ".join("*" if v is STAR else str(v) for v in word)


def read_word(path, field: Field) -> tuple:
    try:
        return parse_word(Path(path).read_text(), field)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def read_assignment(path) -> DataAssignment:
    try:
        return DataAssignment.from_dict(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed assignment: {exc}") from None


def scheme_to_dict(scheme: GradientCodingScheme) -> dict:
    out = {"assignment": scheme.assignment.to_dict(), "code": code_to_dict(scheme.code)}
    out.update(scheme.params())
    return out


def scheme_from_dict(d: dict) -> GradientCodingScheme:
    try:
        a = DataAssignment.from_dict(d["assignment"])
        net = build_network(a)
        code = code_from_dict(d["code"], net)
        return GradientCodingScheme(a, net, code, int(d["d_min"]), int(d["tau_s"]), int(d["tau_b"]),
                                    int(d["m"]), int(d["p"]), int(d.get("seed", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed scheme: {exc}") from None


def read_scheme(path) -> GradientCodingScheme:
    return scheme_from_dict(_load_json(path))


def read_json(path) -> dict:
    return _load_json(path)
