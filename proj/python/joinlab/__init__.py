# Copyright 2026 The joinlab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Distance-array joining laboratory."""

import json

from . import _core
from ._core import CapExceeded, ToleranceInconsistency, kernel_isomorphic as _iso

__all__ = [
    "CapExceeded",
    "ToleranceInconsistency",
    "array_laws_equal",
    "constants",
    "depbound",
    "experiment_ids",
    "kernel_isomorphic",
    "markov_spectrum",
    "reproduce",
    "twin_blocks",
    "twin_quotient",
    "wp_assignment",
]

experiment_ids = _core.experiment_ids
markov_spectrum = _core.markov_spectrum
wp_assignment = _core.wp_assignment


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def constants():
    return json.loads(_core.constants_json())


def reproduce(prop_id, config=None):
    return json.loads(_core.reproduce_json(prop_id, None if config is None else _text(config)))


def depbound(config):
    return json.loads(_core.depbound_json(_text(config)))


def twin_quotient(space, tol=None):
    return json.loads(_core.twin_quotient_json(_text(space), tol))


def twin_blocks(space, tol=None):
    return _core.twin_blocks(_text(space), tol)


def array_laws_equal(a, b, n):
    return _core.array_laws_equal(_text(a), _text(b), n)


def kernel_isomorphic(a, b, tol=0.0):
    return _iso(_text(a), _text(b), tol)
