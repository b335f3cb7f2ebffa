"""Two-arm training protocol: Kaiming baseline vs. snapshot -> CLI
re-initialization -> resume, with CSV metrics and PNG curve plots."""

from __future__ import annotations

import csv
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn
from torch.utils.data import DataLoader

from .data import load_datasets
from .models import build_model, kaiming_init
from .snapshot import export_snapshot, import_snapshot

__all__ = ["ExperimentResult", "run_paper_experiment", "reinit_via_cli"]

SELECTORS = ("linear", "conv", "all", "none")


@dataclass
class ExperimentResult:
    dataset: str
    selector: str
    pretrain_epochs: int
    seed: int
    records: dict = field(default_factory=dict)  # arm -> list of row dicts
    files: list = field(default_factory=list)

    def final_accuracy(self, arm: str) -> float:
        rows = [r for r in self.records[arm] if r["split"] == "test"]
        return rows[-1]["accuracy"]

    def best_accuracy(self, arm: str) -> float:
        rows = [r for r in self.records[arm] if r["split"] == "test"]
        return max(r["accuracy"] for r in rows)


def reinit_via_cli(payload: bytes, selector: str, seed: int, cli: str = "hcore") -> bytes:
    """Round-trip a snapshot through `hcore reinit`; abort with the CLI's
    stderr on a nonzero exit."""
    with tempfile.TemporaryDirectory(prefix="hcore-harness-") as tmp:
        src = Path(tmp) / "snapshot.hcw"
        dst = Path(tmp) / "reinit.hcw"
        src.write_bytes(payload)
        proc = subprocess.run(
            [
                cli, "reinit",
                "--weights", str(src),
                "--out", str(dst),
                "--seed", str(seed),
                "--layers", selector,
            ],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise RuntimeError(
                f"hcore reinit exited {proc.returncode}: {proc.stderr.strip()}"
            )
        return dst.read_bytes()


def _evaluate(model: nn.Module, loader: DataLoader, criterion) -> tuple[float, float]:
    model.eval()
    total = 0
    loss_sum = 0.0
    correct = 0
    with torch.no_grad():
        for x, y in loader:
            logits = model(x)
            loss_sum += criterion(logits, y).item() * len(y)
            correct += (logits.argmax(dim=1) == y).sum().item()
            total += len(y)
    return loss_sum / total, correct / total


def _train_arm(
    arm: str,
    dataset_name: str,
    train_ds,
    test_ds,
    num_classes: int,
    selector: str,
    pretrain_epochs: int,
    total_epochs: int,
    seed: int,
    batch_size: int,
    lr: float,
    momentum: float,
    cli: str,
):
    torch.manual_seed(seed)
    model = kaiming_init(build_model(dataset_name), seed)
    criterion = nn.CrossEntropyLoss()
    optimizer = torch.optim.SGD(model.parameters(), lr=lr, momentum=momentum)
    shuffle_gen = torch.Generator().manual_seed(seed)
    train_loader = DataLoader(
        train_ds, batch_size=batch_size, shuffle=True, generator=shuffle_gen
    )
    test_loader = DataLoader(test_ds, batch_size=512, shuffle=False)
    rows = []
    for epoch in range(1, total_epochs + 1):
        model.train()
        seen = 0
        loss_sum = 0.0
        correct = 0
        for x, y in train_loader:
            optimizer.zero_grad()
            logits = model(x)
            loss = criterion(logits, y)
            loss.backward()
            optimizer.step()
            loss_sum += loss.item() * len(y)
            correct += (logits.argmax(dim=1) == y).sum().item()
            seen += len(y)
        rows.append(
            {"epoch": epoch, "split": "train", "loss": loss_sum / seen, "accuracy": correct / seen}
        )
        test_loss, test_acc = _evaluate(model, test_loader, criterion)
        rows.append(
            {"epoch": epoch, "split": "test", "loss": test_loss, "accuracy": test_acc}
        )
        if arm == "hcore" and epoch == pretrain_epochs and selector != "none":
            payload = export_snapshot(model, epoch=epoch)
            import_snapshot(model, reinit_via_cli(payload, selector, seed, cli=cli))
            # Fresh weights get a fresh optimizer (momentum buffers reset).
            optimizer = torch.optim.SGD(model.parameters(), lr=lr, momentum=momentum)
    return rows


def _write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "split", "loss", "accuracy"])
        for row in rows:
            writer.writerow([row["epoch"], row["split"], repr(row["loss"]), repr(row["accuracy"])])


def _plot_curves(path: Path, records: dict, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_acc, ax_loss) = plt.subplots(1, 2, figsize=(11, 4.5))
    for arm, rows in records.items():
        tests = [r for r in rows if r["split"] == "test"]
        trains = [r for r in rows if r["split"] == "train"]
        ax_acc.plot([r["epoch"] for r in tests], [r["accuracy"] for r in tests], label=arm)
        ax_loss.plot([r["epoch"] for r in trains], [r["loss"] for r in trains], label=arm)
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("test accuracy")
    ax_acc.legend()
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss")
    ax_loss.legend()
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def run_paper_experiment(
    dataset: str,
    selector: str,
    pretrain_epochs: int,
    total_epochs: int = 150,
    seed: int = 0,
    out_dir="runs",
    data_root=None,
    train_limit: int | None = None,
    test_limit: int | None = None,
    batch_size: int = 64,
    lr: float = 0.001,
    momentum: float = 0.9,
    cli: str = "hcore",
) -> ExperimentResult:
    """Train both arms, write per-arm metrics CSVs, curve PNGs, and a
    final-accuracy summary row."""
    if selector not in SELECTORS:
        raise ValueError(f"selector must be one of {SELECTORS}, got {selector!r}")
    if not 1 <= pretrain_epochs <= total_epochs:
        raise ValueError("pretrain_epochs must lie in [1, total_epochs]")
    train_ds, test_ds, num_classes = load_datasets(
        dataset, root=data_root, train_limit=train_limit, test_limit=test_limit, seed=seed
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = f"{dataset}_{selector}_N{pretrain_epochs}_seed{seed}"
    result = ExperimentResult(
        dataset=dataset, selector=selector, pretrain_epochs=pretrain_epochs, seed=seed
    )
    for arm in ("kaiming", "hcore"):
        rows = _train_arm(
            arm, dataset, train_ds, test_ds, num_classes, selector,
            pretrain_epochs, total_epochs, seed, batch_size, lr, momentum, cli,
        )
        result.records[arm] = rows
        csv_path = out_dir / f"{tag}_{arm}.csv"
        _write_csv(csv_path, rows)
        result.files.append(str(csv_path))

    png_path = out_dir / f"{tag}.png"
    _plot_curves(png_path, result.records, title=tag)
    result.files.append(str(png_path))

    summary_path = out_dir / f"{tag}_summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["dataset", "selector", "pretrain_epochs", "seed", "arm", "final_accuracy", "best_accuracy"]
        )
        for arm in ("kaiming", "hcore"):
            writer.writerow(
                [
                    dataset, selector, pretrain_epochs, seed, arm,
                    repr(result.final_accuracy(arm)), repr(result.best_accuracy(arm)),
                ]
            )
    result.files.append(str(summary_path))
    return result
