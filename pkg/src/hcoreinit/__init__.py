"""Hypercore decompositions of neural-network layer graphs and
core-guided weight re-initialization.

The pipeline: capture a weight snapshot after brief pretraining, unroll
each layer into positive/negative bipartite incidence graphs, rank the
output units by weighted hypercore number, and resample the weights from
normals whose means follow those ranks (variance stays at 2/fan_in).
"""

from .datasets import Dataset, IdxFormatError, blob_dataset, load_mnist_idx, mnist_dataset
from .formats import (
    EdgeListFormatError,
    Hcw1FormatError,
    decode_hcw1,
    encode_hcw1,
    read_edge_list,
    write_core_csv,
    write_edge_list,
    write_metrics_csv,
    write_plan_csv,
)
from .hypergraph import (
    CoreVector,
    WeightedIncidenceGraph,
    brute_force_core,
    hcore_numbers,
    khypercore,
    whcore_numbers,
)
from .mlp import (
    DivergenceError,
    MetricRecord,
    MetricsLog,
    MlpModel,
    TrainConfig,
    init_baseline,
    run_experiment,
    train,
)
from .nngraph import (
    LayerSpec,
    SignedLayerGraphs,
    SnapshotLayer,
    WeightSnapshot,
    conv_layer_graphs,
    linear_layer_graphs,
    snapshot_graphs,
)
from .plans import (
    ConvPlanEntry,
    InitPlan,
    LinearPlanEntry,
    PlanMismatchError,
    build_plan,
    cnn_plan,
    fcnn_plan,
    kaiming_variance,
    sample_reinit,
)
from .zeromean import (
    ZeroMeanCheck,
    conv_core_pair_source,
    halfnormal_pair_source,
    zero_mean_check,
)

__version__ = "0.1.0"
