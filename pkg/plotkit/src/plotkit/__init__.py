"""Render figures from capspectra run and sweep directories.

The package reads only the documented text artifacts (spectrum.txt,
metadata.json, summary.csv) and never imports the simulation code.
"""

from .io import SchemaError, discover_runs, load_metadata, load_spectrum, load_summary
from .figures import KINDS, PlotJob, render

__all__ = [
    "KINDS",
    "PlotJob",
    "SchemaError",
    "discover_runs",
    "load_metadata",
    "load_spectrum",
    "load_summary",
    "render",
]
