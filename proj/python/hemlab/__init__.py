"""Holomorphic-embedding power flow with Padé diagnostics.

Cases are given as a path to a JSON case file or as the JSON text itself.
"""

import csv
import io
import json
import os

from . import _hemlab
from ._hemlab import HemlabError, cf_estimate, line_capacity

__all__ = [
    "HemlabError",
    "solve",
    "pade",
    "roots",
    "series",
    "sweep",
    "snbp",
    "cf",
    "cf_estimate",
    "line_capacity",
]


def _case_text(case):
    if isinstance(case, dict):
        return json.dumps(case)
    if isinstance(case, os.PathLike) or (isinstance(case, str) and not case.lstrip().startswith("{")):
        with open(case) as f:
            return f.read()
    return case


def _rows(text, convert):
    return [{k: convert.get(k, str)(v) for k, v in r.items()} for r in csv.DictReader(io.StringIO(text))]


def _bool(s):
    return s == "true"


def solve(case, embedding="canonical", alpha=1.0, max_terms=60, precision_bits=53, eps=1e-8,
          mismatch_tol=1e-6, spurious_tol=None, germ_tol=None, history=False):
    """Solve a case; returns the JSON report as a dict."""
    text = _hemlab.solve_json(_case_text(case), embedding, alpha, max_terms, precision_bits, eps,
                              mismatch_tol, spurious_tol, germ_tol, history)
    return json.loads(text)


def pade(coefficients, m):
    """[m/m+1] approximant of a complex coefficient list (native precision)."""
    return _hemlab.pade([complex(c) for c in coefficients], m)


def roots(case, embedding="canonical", terms=60, precision_bits=53, spurious_tol=None):
    return _rows(_hemlab.roots_csv(_case_text(case), embedding, terms, precision_bits, spurious_tol),
                 {"re": float, "im": float, "spurious": _bool, "M": int})


def series(case, embedding="canonical", terms=60, precision_bits=53):
    """Voltage coefficients as {bus_id: [c0, c1, ...]}."""
    out = {}
    for r in csv.DictReader(io.StringIO(_hemlab.series_csv(_case_text(case), embedding, terms,
                                                            precision_bits))):
        out.setdefault(r["bus_id"], []).append(complex(float(r["re"]), float(r["im"])))
    return out


def sweep(case, start, stop, steps, embedding="canonical", terms=60, precision_bits=53):
    return _rows(_hemlab.sweep_csv(_case_text(case), embedding, start, stop, steps, terms,
                                   precision_bits),
                 {"alpha": float, "vmag": float, "vang": float, "flagged": _bool})


def snbp(case, embedding="classical", terms=60, precision_bits=53):
    """Positive-real SNBP estimate, or None."""
    return _hemlab.snbp(_case_text(case), embedding, terms, precision_bits)


def cf(case, embedding="canonical", samples=12, precision_bits=1024, scale=None):
    """Returns ([(alpha_hat, cf), ...], bcc_estimate)."""
    return _hemlab.cf(_case_text(case), embedding, samples, precision_bits, scale)
