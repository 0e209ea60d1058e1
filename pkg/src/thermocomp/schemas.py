"""JSON schemas for every file format read or written by the CLI."""
from __future__ import annotations

import jsonschema

RATIONAL = {
    "oneOf": [
        {"type": "string", "pattern": r"^\s*[0-9]+(\.[0-9]+)?(\s*/\s*[0-9]+)?\s*$"},
        {"type": "integer", "minimum": 0},
    ]
}
LABEL = {"type": ["string", "integer"]}
NUMBER = {"type": "number"}

DISTRIBUTION = {
    "type": "object",
    "required": ["support", "probs"],
    "properties": {
        "support": {"type": "array", "items": LABEL, "minItems": 1},
        "probs": {"type": "array", "items": RATIONAL, "minItems": 1},
    },
}

PARTITION = {
    "type": "object",
    "required": ["space_size", "blocks"],
    "properties": {
        "space_size": {"type": "integer", "minimum": 1},
        "blocks": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
    },
}

LIFT_INPUT = {
    "type": "object",
    "required": ["distribution", "partition"],
    "properties": {"distribution": DISTRIBUTION, "partition": PARTITION},
}

TREE_INPUT = {
    "oneOf": [
        DISTRIBUTION,
        {
            "type": "object",
            "required": ["distribution"],
            "properties": {
                "distribution": DISTRIBUTION,
                "partition": {
                    "oneOf": [
                        PARTITION,
                        {"type": "object", "additionalProperties": {"type": "array", "items": LABEL}},
                    ]
                },
            },
        },
    ]
}

OPERATION = {
    "type": "object",
    "required": ["in", "out", "rows"],
    "properties": {
        "in": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "out": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "rows": {"type": "object", "additionalProperties": {"type": "object", "additionalProperties": RATIONAL}},
    },
}

REALIZE_INPUT = {
    "oneOf": [
        OPERATION,
        {
            "type": "object",
            "required": ["operation"],
            "properties": {"operation": OPERATION, "prior": DISTRIBUTION},
        },
    ]
}

PERMUTATION = {
    "type": "object",
    "required": ["map"],
    "properties": {"map": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}},
}

ENSEMBLE = {
    "type": "object",
    "required": ["branches"],
    "properties": {
        "branches": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "object", "required": ["w", "map"], "properties": {"w": RATIONAL, "map": PERMUTATION["properties"]["map"]}},
        }
    },
}

_REG = {"type": "string", "minLength": 1}
STEP = {
    "type": "object",
    "required": ["op"],
    "properties": {
        "op": {"enum": ["input", "swap", "cnot", "thermalize", "merge", "unmerge"]},
        "target": _REG,
        "control": _REG,
        "a": _REG,
        "b": _REG,
        "env": {"oneOf": [_REG, {"type": "array", "items": _REG, "minItems": 1}]},
        "p": RATIONAL,
        "mode": {"enum": ["decorrelate", "uniform"]},
        "label": {"type": "string"},
    },
    "additionalProperties": False,
}

PROTOCOL = {
    "type": "object",
    "required": ["registers", "steps"],
    "properties": {
        "registers": {
            "type": "object",
            "properties": {"comp": {"type": "array", "items": _REG}, "env": {"type": "array", "items": _REG}},
            "additionalProperties": False,
        },
        "steps": {"type": "array", "items": STEP},
        "hot": {"type": "array", "items": _REG},
        "name": {"type": "string"},
    },
}

# --- outputs --------------------------------------------------------------

_BY_UNIT = lambda inner: {  # noqa: E731
    "type": "object",
    "minProperties": 1,
    "properties": {"nat": inner, "bit": inner},
    "additionalProperties": False,
}

CAPACITY_REPORT = {
    "type": "object",
    "required": ["distribution", "capacity"],
    "properties": {
        "distribution": DISTRIBUTION,
        "capacity": _BY_UNIT({"type": "object", "required": ["K", "S", "I"]}),
    },
}

FUNDAMENTAL_REPORT = {
    "type": "object",
    "required": ["lifted", "report"],
    "properties": {
        "lifted": DISTRIBUTION,
        "report": _BY_UNIT(
            {"type": "object", "required": ["total_S", "computational_H", "noncomputational_S", "mutual_information", "residual"]}
        ),
    },
}

REALIZATION_REPORT = {
    "type": "object",
    "required": ["operation", "classification", "budget", "realization", "induced", "round_trip"],
    "properties": {
        "operation": OPERATION,
        "induced": OPERATION,
        "prior": DISTRIBUTION,
        "classification": {"type": "object", "required": ["deterministic", "reversible"]},
        "budget": {"type": "object", "required": ["per_input_block", "total"]},
        "realization": {"type": "object", "required": ["space_size", "partition_in", "partition_out", "counts"]},
        "round_trip": {"type": "boolean"},
        "ledger": _BY_UNIT({"type": "object", "required": ["dH_comp", "dS_nc", "dS_total"]}),
    },
}

TIMELINE = {
    "type": "object",
    "required": ["registers", "steps", "summary"],
    "properties": {
        "steps": {
            "type": "array",
            "items": {"type": "object", "required": ["index", "label", "joint", "merged"]},
        },
        "summary": _BY_UNIT({"type": "object", "required": ["delta_S_total", "imported"]}),
    },
}

SIMULATION_REPORT = {
    "type": "object",
    "required": ["protocol", "timeline"],
    "properties": {"protocol": PROTOCOL, "timeline": TIMELINE},
}

TREE_REPORT = {
    "type": "object",
    "required": ["unit", "leaves", "total_area"],
    "properties": {"unit": {"enum": ["nat", "bit"]}, "leaves": {"type": "array"}},
}

ENSEMBLE_REPORT = {
    "type": "object",
    "required": ["initial", "ensemble", "final", "delta_S"],
    "properties": {"initial": DISTRIBUTION, "final": DISTRIBUTION, "ensemble": ENSEMBLE, "delta_S": _BY_UNIT(NUMBER)},
}


def validate(instance, schema) -> None:
    """Raise ``jsonschema.ValidationError`` for the most relevant problem, if any."""
    validator = jsonschema.Draft202012Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(instance))
    if error is not None:
        raise error


def json_path(error: jsonschema.ValidationError) -> str:
    path = "$"
    for part in error.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path
