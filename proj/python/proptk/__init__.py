# Copyright 2026 The proptk Authors.
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

"""Propaganda annotation analytics: agreement, aggregation, clustering."""

from proptk._core import (
    EndpointError,
    Error,
    PreconditionError,
    UndefinedStatistic,
    ValidationError,
    cohen_kappa,
    dawid_skene,
    fleiss_kappa,
    hybrid_cluster,
    krippendorff_alpha,
    mean_pairwise_cohen_kappa,
    normalize,
    pca2d,
    run_cli,
    strip_suffix,
)

__version__ = "0.1.0"
