"""Grid-search benchmark harness for the transductive evaluation protocol."""

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .classify import accuracy
from .dataset import DomainPair, LabeledMatrix, sample_per_class
from .kernels import JointKernel, KernelSpec, build_joint_kernel
from .mmd import mmd_latent, mmd_matrix, mmd_trace
from .tlr import eigen_basis

logger = logging.getLogger(__name__)

CSV_HEADER = ("pair", "alpha", "beta", "k", "run", "accuracy")


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter search space, enumerated alphas-outer to ks-inner."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    ks: tuple[int, ...]

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        betas = tuple(float(b) for b in self.betas)
        ks = tuple(int(k) for k in self.ks)
        if not alphas or not betas or not ks:
            raise ValueError("grid axes must be non-empty")
        if any(not np.isfinite(v) or v <= 0 for v in alphas + betas):
            raise ValueError("alphas and betas must be positive finite reals")
        if any(k < 1 for k in ks):
            raise ValueError("every k must be >= 1")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "ks", ks)

    @classmethod
    def default(cls) -> "GridSpec":
        """The standard search space: 6 weights per axis times 20 widths."""
        return cls(
            alphas=tuple(10.0**e for e in range(-5, 1)),
            betas=tuple(10.0**e for e in range(-5, 1)),
            ks=tuple(range(10, 201, 10)),
        )

    def configurations(self) -> list[tuple[float, float, int]]:
        """Every (alpha, beta, k) triple in enumeration order."""
        return [(a, b, k) for a in self.alphas for b in self.betas for k in self.ks]


@dataclass(frozen=True)
class ConfigResult:
    """Per-run accuracies of one configuration."""

    alpha: float
    beta: float
    k: int
    accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))


@dataclass(frozen=True)
class SkippedConfig:
    """A configuration left out of evaluation, with the reason logged."""

    alpha: float
    beta: float
    k: int
    reason: str


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Everything one grid search produced, in grid enumeration order."""

    pair_id: str
    records: tuple[ConfigResult, ...]
    skipped: tuple[SkippedConfig, ...]
    train_sizes: tuple[int, ...]
    run_seconds: tuple[float, ...]
    wall_time_seconds: float

    @property
    def best(self) -> ConfigResult:
        """Record with the highest mean accuracy; ties go to the earliest."""
        means = [record.mean_accuracy for record in self.records]
        return self.records[int(np.argmax(means))]

    @property
    def total_configurations(self) -> int:
        return len(self.records) + len(self.skipped)


def grid_search(
    pair: DomainPair,
    grid: GridSpec | None = None,
    kernel: KernelSpec | None = None,
    runs: int = 1,
    seed: int = 0,
    per_class: int | None = None,
    jobs: int = 1,
    pair_id: str = "pair",
) -> ExperimentReport:
    """Score every grid configuration by fitting and 1-NN classifying the target.

    With per_class set, every run redraws that many source rows per class;
    accuracies are recorded per run and averaged per configuration.
    Configurations whose k reaches n1 + n2 are skipped with a logged warning
    but stay accounted for in the report. Deterministic for a fixed seed,
    including under parallel execution (jobs > 1), because worker results are
    merged by configuration index.
    """
    grid = grid or GridSpec.default()
    kernel = kernel or KernelSpec()
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if pair.target.labels is None:
        raise ValueError("target labels are required to score a benchmark")
    if per_class is None:
        n1 = pair.source.n
    else:
        _, counts = np.unique(pair.source.labels, return_counts=True)
        n1 = int(np.minimum(counts, per_class).sum())
    n_total = n1 + pair.target.n

    configurations = grid.configurations()
    evaluated: list[int] = []
    skipped: list[SkippedConfig] = []
    for index, (alpha, beta, k) in enumerate(configurations):
        if k < n_total:
            evaluated.append(index)
        else:
            reason = f"k={k} >= n1+n2={n_total}"
            skipped.append(SkippedConfig(alpha=alpha, beta=beta, k=k, reason=reason))
    for width in sorted({entry.k for entry in skipped}):
        count = sum(1 for entry in skipped if entry.k == width)
        logger.warning(
            "skipping %d configuration(s) with k=%d: k >= n1+n2=%d", count, width, n_total
        )
    if not evaluated:
        raise ValueError(f"empty effective grid: every k is >= n1+n2={n_total}")

    run_seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=runs)
    scores = np.zeros((len(configurations), runs))
    train_sizes: list[int] = []
    run_seconds: list[float] = []
    started = time.perf_counter()
    for run in range(runs):
        run_started = time.perf_counter()
        if per_class is None:
            train = pair.source
        else:
            train = sample_per_class(pair.source, per_class, int(run_seeds[run]))
        train_sizes.append(train.n)
        _score_run(train, pair.target, kernel, configurations, evaluated, scores[:, run], jobs)
        run_seconds.append(time.perf_counter() - run_started)

    records = tuple(
        ConfigResult(
            alpha=configurations[i][0],
            beta=configurations[i][1],
            k=configurations[i][2],
            accuracies=tuple(float(v) for v in scores[i]),
        )
        for i in evaluated
    )
    return ExperimentReport(
        pair_id=pair_id,
        records=records,
        skipped=tuple(skipped),
        train_sizes=tuple(train_sizes),
        run_seconds=tuple(run_seconds),
        wall_time_seconds=time.perf_counter() - started,
    )


def _score_run(
    train: LabeledMatrix,
    target: LabeledMatrix,
    kernel: KernelSpec,
    configurations: list[tuple[float, float, int]],
    evaluated: list[int],
    out_scores: np.ndarray,
    jobs: int,
) -> None:
    """Fill out_scores[i] for every evaluated configuration index i.

    Configurations with one beta/alpha ratio share a projection basis (the
    solver normalization makes the basis invariant to joint weight scaling),
    and smaller widths are leading column slices of larger ones, so the run
    factorizes into one eigensolve per ratio.
    """
    joint = build_joint_kernel(train.features, target.features, kernel)
    K = joint.K
    n1 = train.n
    coeff = mmd_matrix(n1, target.n)
    B = K @ coeff.L @ K
    B = 0.5 * (B + B.T)
    source_part = K[:, :n1] @ K[:n1, :]  # K M K split by domain block of M
    source_part = 0.5 * (source_part + source_part.T)
    target_part = K[:, n1:] @ K[n1:, :]
    target_part = 0.5 * (target_part + target_part.T)

    groups: dict[float, list[int]] = {}
    for index in evaluated:
        alpha, beta, _ = configurations[index]
        groups.setdefault(beta / alpha, []).append(index)

    def score_group(item: tuple[float, list[int]]) -> list[tuple[int, float]]:
        ratio, members = item
        _, basis = eigen_basis(source_part + ratio * target_part, B)
        widths = sorted({configurations[i][2] for i in members})
        by_width = _accuracy_by_width(K, n1, train.labels, target.labels, basis, widths)
        return [(i, by_width[configurations[i][2]]) for i in members]

    items = list(groups.items())
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(score_group, items))
    else:
        chunks = [score_group(item) for item in items]
    for chunk in chunks:
        for index, value in chunk:
            out_scores[index] = value


def _accuracy_by_width(
    K: np.ndarray,
    n1: int,
    train_labels: np.ndarray,
    target_labels: np.ndarray,
    basis: np.ndarray,
    widths: list[int],
) -> dict[int, float]:
    """1-NN target accuracy for each latent width, widths ascending.

    Squared distances accumulate over column blocks so each width extends the
    previous one instead of starting over. Ties resolve to the lowest
    training row index, matching knn1_predict.
    """
    latent = K @ basis[:, : widths[-1]]
    latent_s, latent_t = latent[:n1], latent[n1:]
    distances = np.zeros((latent_t.shape[0], latent_s.shape[0]))
    out: dict[int, float] = {}
    lower = 0
    for width in widths:
        distances += cdist(latent_t[:, lower:width], latent_s[:, lower:width], "sqeuclidean")
        lower = width
        predicted = np.asarray(train_labels)[distances.argmin(axis=1)]
        out[width] = accuracy(predicted, target_labels)
    return out


def run_protocol_ixmas_style(
    pair: DomainPair,
    per_class: int = 30,
    runs: int = 10,
    grid: GridSpec | None = None,
    kernel: KernelSpec | None = None,
    seed: int = 0,
    jobs: int = 1,
    pair_id: str = "pair",
) -> ExperimentReport:
    """Repeated-draw protocol: fixed-size per-class training samples, full target."""
    return grid_search(
        pair,
        grid=grid,
        kernel=kernel,
        runs=runs,
        seed=seed,
        per_class=per_class,
        jobs=jobs,
        pair_id=pair_id,
    )


def relative_latent_gap(p_source: np.ndarray, p_target: np.ndarray) -> float:
    """Squared latent mean gap over the mean squared latent sample norm."""
    stacked = np.vstack([p_source, p_target])
    energy = float(np.mean(np.sum(stacked * stacked, axis=1)))
    return mmd_latent(p_source, p_target) / max(energy, 1e-300)


def relative_kernel_gap(kernel: JointKernel) -> float:
    """Unprojected kernel-space mean gap over the mean sample self-similarity.

    Normalized the same way as relative_latent_gap: the trace-form gap is the
    squared mean difference of the kernel embedding, and the mean diagonal is
    that embedding's mean squared sample norm.
    """
    energy = float(np.mean(np.diagonal(kernel.K)))
    return mmd_trace(kernel, mmd_matrix(kernel.n1, kernel.n2)) / max(energy, 1e-300)


@dataclass(frozen=True)
class ReportRow:
    """One CSV line of a report: a single run of a single configuration."""

    pair: str
    alpha: float
    beta: float
    k: int
    run: int
    accuracy: float


def emit_report(report: ExperimentReport, path, format: str = "csv") -> None:
    """Write a report as CSV (one row per configuration and run) or markdown."""
    if format == "csv":
        _emit_csv(report, path)
    elif format == "markdown":
        _emit_markdown(report, path)
    else:
        raise ValueError(f"format must be 'csv' or 'markdown', got {format!r}")


def _emit_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in report.records:
            for run, value in enumerate(record.accuracies):
                writer.writerow(
                    [
                        report.pair_id,
                        repr(float(record.alpha)),
                        repr(float(record.beta)),
                        record.k,
                        run,
                        repr(float(value)),
                    ]
                )


def read_report_csv(path) -> list[ReportRow]:
    """Parse a CSV report back into rows; floats round-trip exactly."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected report header {header!r}")
        return [
            ReportRow(
                pair=row[0],
                alpha=float(row[1]),
                beta=float(row[2]),
                k=int(row[3]),
                run=int(row[4]),
                accuracy=float(row[5]),
            )
            for row in reader
            if row
        ]


def _emit_markdown(report: ExperimentReport, path) -> None:
    best = report.best
    runs = len(report.records[0].accuracies) if report.records else 0
    lines = [
        f"# Benchmark: {report.pair_id}",
        "",
        f"- configurations: {len(report.records)} evaluated, {len(report.skipped)} skipped",
        f"- runs per configuration: {runs}",
        f"- training sizes per run: {', '.join(str(s) for s in report.train_sizes)}",
        f"- wall time: {report.wall_time_seconds:.2f} s",
        f"- best: alpha={best.alpha:g}, beta={best.beta:g}, k={best.k}, "
        f"mean accuracy {best.mean_accuracy:.4f}",
        "",
        "| alpha | beta | k | mean accuracy |",
        "| --- | --- | --- | --- |",
    ]
    for record in report.records:
        cells = [
            f"{record.alpha:g}",
            f"{record.beta:g}",
            str(record.k),
            f"{record.mean_accuracy:.4f}",
        ]
        if record is best:
            cells = [f"**{cell}**" for cell in cells]
        lines.append("| " + " | ".join(cells) + " |")
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
