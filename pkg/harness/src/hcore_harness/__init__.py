"""PyTorch harness: full-protocol CNN experiments exchanging weights with
the `hcore` CLI through HCW1 snapshots."""

from .experiment import ExperimentResult, reinit_via_cli, run_paper_experiment
from .hcw1 import LayerRecord, SnapshotFile, read_hcw1, write_hcw1
from .models import CifarNet, MnistNet, build_model, kaiming_init
from .snapshot import export_snapshot, import_snapshot

__version__ = "0.1.0"
