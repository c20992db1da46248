"""Arbitrary-precision reference values.

``mp_oracle`` computes every value with mpmath at 50 digits; ``frozen.json``
holds the results so that the test suite does not depend on mpmath speed.
Regenerate with ``python -m tests.oracle.mp_oracle``.
"""

import json
from pathlib import Path

FROZEN_PATH = Path(__file__).with_name("frozen.json")


def frozen():
    with open(FROZEN_PATH, encoding="utf-8") as fh:
        raw = json.load(fh)
    return _decode(raw)


def _decode(obj):
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    if isinstance(obj, str):
        try:
            return float(obj)
        except ValueError:
            return obj
    return obj
