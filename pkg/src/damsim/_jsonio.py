import hashlib
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

FORMAT_VERSION = "1"


def dumps(obj, compact=False):
    """Serialize to deterministic JSON; floats use repr, which round-trips."""
    if compact:
        return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj):
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


def write(path, obj, compact=False):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, compact))


def read(path):
    with open(path) as fh:
        return json.load(fh)


def floats(a):
    """Nested python lists of floats from an array."""
    return np.asarray(a, dtype=np.float64).tolist()


def money_out(x):
    x = Fraction(x)
    return {"exact": f"{x.numerator}/{x.denominator}", "dollars": float(x)}


def money_in(d):
    if isinstance(d, dict):
        return Fraction(d["exact"])
    return Fraction(d)
