"""Python access to the cxrils dataset builder."""

import json

from . import _core
from ._core import DataError, config_self_test, dump_config, make_corpus

__all__ = [
    "DataError",
    "config_self_test",
    "dump_config",
    "make_corpus",
    "map_locations",
    "run_pipeline",
    "structure_report",
]


def structure_report(text):
    return json.loads(_core.structure_report_json(text))


def map_locations(phrases):
    if isinstance(phrases, str):
        phrases = [phrases]
    return json.loads(_core.map_locations_json(list(phrases)))


def run_pipeline(manifest, out, jobs=1, config=None):
    return json.loads(_core.run_pipeline_json(str(manifest), str(out), jobs, str(config or "")))
