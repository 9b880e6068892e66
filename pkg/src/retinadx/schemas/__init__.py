"""Versioned JSON schemas for the documents the command line writes."""

import json
from importlib import resources

NAMES = ("report", "manifest", "predictions", "eval", "curves", "truth")


def load_schema(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    return json.loads(resources.files(__name__).joinpath(f"{name}.schema.json").read_text())
