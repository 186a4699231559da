"""Monte Carlo study of the estimator under the optimal input

For every theta of an ExperimentConfig and every replication r the harness
draws an fGn (or other) noise path from the stream (seed, theta index, r),
simulates the ARX(1) model, estimates theta and records

    Phi = sqrt(N) (theta_hat - theta)

whose limit law is N(0, 1 / I(theta)). Replications are dispatched through
joblib and come back in replication order, so the report does
not depend on the number of workers.
"""

import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import signal, special, stats

from fgnarx.arx import asymptotic_fisher, mle_estimate, trajectory_from_observations
from fgnarx.config import ExperimentConfig, build_design, theta_tag
from fgnarx.exceptions import ExperimentError, FgnArxError
from fgnarx.formats import save_histogram, save_table
from fgnarx.gaussian_sim import build_embedding, sample_path, stream
from fgnarx.innovations import build_innovation_system

logger = logging.getLogger(__name__)

MOMENT_ORDERS = (1, 2, 4)
MIN_NORMALITY_SAMPLES = 100


@dataclass(frozen=True)
class ReplicationFailure:
    """A replication excluded from the summary, with the key that reproduces it"""
    theta_index: int
    replication: int
    message: str

    @property
    def stream_key(self) -> Tuple[int, int]:
        return self.theta_index, self.replication


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    target_density: np.ndarray


@dataclass(eq=False)
class ThetaSummary:
    """Aggregated statistics of Phi for one theta"""
    theta: float
    theta_index: int
    n: int
    replications: int
    phis: np.ndarray
    theta_hats: np.ndarray
    observed_infos: np.ndarray
    failures: List[ReplicationFailure]
    histogram: Histogram
    normality_pvalue: Optional[float]
    consistency_nu: float
    runtime: float = field(default=0.0, compare=False)

    @property
    def asymptotic_fisher(self) -> float:
        return asymptotic_fisher(self.theta)

    @property
    def theoretical_variance(self) -> float:
        return 1.0 / self.asymptotic_fisher

    @property
    def empirical_variance(self) -> float:
        return float(np.var(self.phis, ddof=1))

    @property
    def empirical_mean(self) -> float:
        return float(np.mean(self.phis))

    @property
    def variance_ratio(self) -> float:
        return self.empirical_variance / self.theoretical_variance

    @property
    def efficiency(self) -> float:
        """I(theta) times the empirical mean of Phi^2; tends to 1 for an efficient estimator"""
        return self.asymptotic_fisher * float(np.mean(self.phis ** 2))

    @property
    def moments(self) -> Dict[str, float]:
        return {str(q): float(np.mean(np.abs(self.phis) ** q)) for q in MOMENT_ORDERS}

    @property
    def target_moments(self) -> Dict[str, float]:
        scale = math.sqrt(self.theoretical_variance)
        return {str(q): gaussian_abs_moment(scale, q) for q in MOMENT_ORDERS}

    @property
    def consistency_fraction(self) -> float:
        """Share of replications with |theta_hat - theta| > nu"""
        return float(np.mean(np.abs(self.theta_hats - self.theta) > self.consistency_nu))

    @property
    def observed_info_per_step(self) -> float:
        return float(np.mean(self.observed_infos)) / self.n

    def to_dict(self) -> Dict[str, Any]:
        return {
            'theta': self.theta,
            'n': self.n,
            'replications': self.replications,
            'used_replications': int(self.phis.size),
            'failed_replications': len(self.failures),
            'failures': [{'theta_index': f.theta_index, 'replication': f.replication,
                          'message': f.message} for f in self.failures],
            'asymptotic_fisher': self.asymptotic_fisher,
            'theoretical_variance': self.theoretical_variance,
            'empirical_variance': self.empirical_variance,
            'variance_ratio': self.variance_ratio,
            'empirical_mean': self.empirical_mean,
            'normality_pvalue': self.normality_pvalue,
            'efficiency': self.efficiency,
            'moments': self.moments,
            'target_moments': self.target_moments,
            'consistency_nu': self.consistency_nu,
            'consistency_fraction': self.consistency_fraction,
            'observed_info_per_step': self.observed_info_per_step,
            'histogram': {
                'edges': [float(e) for e in self.histogram.edges],
                'counts': [int(c) for c in self.histogram.counts],
            },
        }


@dataclass(eq=False)
class SummaryReport:
    """Table-style report of a Monte Carlo study

    ``runtime`` is informational and kept out of the serialized report, which
    is byte-identical for identical configurations.
    """
    config: ExperimentConfig
    cells: List[ThetaSummary]
    runtime: float = field(default=0.0, compare=False)

    @property
    def seed(self) -> int:
        return self.config.seed

    def cell(self, theta: float) -> ThetaSummary:
        for summary in self.cells:
            if summary.theta == theta:
                return summary
        raise KeyError(theta)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'n': self.config.n,
            'replications': self.config.replications,
            'noise': self.config.noise.to_dict(),
            'input': self.config.input,
            'results': [summary.to_dict() for summary in self.cells],
        }

    def to_json(self, pretty: bool = True) -> str:
        return json.dumps(self.to_dict(), indent=2 if pretty else None, sort_keys=True)

    def to_frame(self) -> pd.DataFrame:
        """One row per theta"""
        rows = []
        for summary in self.cells:
            row = {
                'theta': summary.theta,
                'theoretical_variance': summary.theoretical_variance,
                'empirical_variance': summary.empirical_variance,
                'variance_ratio': summary.variance_ratio,
                'empirical_mean': summary.empirical_mean,
                'normality_pvalue': summary.normality_pvalue,
                'efficiency': summary.efficiency,
                'consistency_fraction': summary.consistency_fraction,
                'observed_info_per_step': summary.observed_info_per_step,
                'asymptotic_fisher': summary.asymptotic_fisher,
                'used_replications': int(summary.phis.size),
                'failed_replications': len(summary.failures),
            }
            for q, value in summary.moments.items():
                row[f'abs_moment_{q}'] = value
                row[f'target_abs_moment_{q}'] = summary.target_moments[q]
            rows.append(row)
        return pd.DataFrame(rows)


def gaussian_abs_moment(scale: float, q: float) -> float:
    """E|X|^q for X ~ N(0, scale^2)"""
    return scale ** q * 2.0 ** (q / 2.0) * special.gamma((q + 1.0) / 2.0) / math.sqrt(math.pi)


def experiment_context(config: ExperimentConfig, theta: float):
    """Innovation system, circulant embedding and input design shared by one theta"""
    system = build_innovation_system(config.noise, config.n)
    embedding = build_embedding(config.noise, config.n)
    design = build_design(config.input, system, config.n, theta, config.alternate_start)
    return system, embedding, design


def run_replication(seed: int, theta_index: int, replication: int, theta: float,
                    context) -> Tuple[float, float]:
    """Simulate and estimate one replication; returns (theta_hat, <M>_N)

    The noise comes from the stream (seed, theta_index, replication), so any
    replication can be rerun on its own.
    """
    system, embedding, design = context
    rng = stream(seed, theta_index, replication)
    xi = sample_path(embedding, rng)
    x = signal.lfilter([1.0], [1.0, -theta], design.u + xi)
    traj = trajectory_from_observations(x, design.v, system, theta=theta)
    result = mle_estimate(traj, system, true_theta=theta)
    if not (math.isfinite(result.theta_hat) and math.isfinite(result.observed_info)):
        raise FloatingPointError('non-finite estimate')
    return result.theta_hat, result.observed_info


def _attempt_replication(seed: int, theta_index: int, replication: int, theta: float,
                         context) -> Tuple[int, float, float, Optional[str]]:
    try:
        theta_hat, info = run_replication(seed, theta_index, replication, theta, context)
        return replication, theta_hat, info, None
    except (FgnArxError, FloatingPointError, np.linalg.LinAlgError) as e:
        return replication, math.nan, math.nan, f'{type(e).__name__}: {e}'


def normality_check(phis: Sequence[float], theta: float) -> float:
    """Kolmogorov-Smirnov p-value of Phi against N(0, 1/I(theta))"""
    phis = np.asarray(phis, dtype=float)
    if phis.size < MIN_NORMALITY_SAMPLES:
        raise ExperimentError(f'normality check needs at least {MIN_NORMALITY_SAMPLES} '
                              f'samples, got {phis.size}')
    scale = math.sqrt(1.0 / asymptotic_fisher(theta))
    return float(stats.kstest(phis, stats.norm(loc=0.0, scale=scale).cdf).pvalue)


def compute_histogram(phis: Sequence[float], bins: Union[int, str],
                      theta: float) -> Histogram:
    """Histogram of Phi with the target normal density at the bin midpoints

    When every value is equal a single unit-width bin centred on it is used.
    """
    phis = np.asarray(phis, dtype=float)
    if phis.size == 0:
        raise ExperimentError('cannot build a histogram of an empty sample')
    if np.ptp(phis) == 0.0:
        edges = np.array([phis[0] - 0.5, phis[0] + 0.5])
    else:
        edges = np.histogram_bin_edges(phis, bins=bins)
    counts, edges = np.histogram(phis, bins=edges)
    widths = np.diff(edges)
    density = counts / (phis.size * widths)
    midpoints = 0.5 * (edges[:-1] + edges[1:])
    target = stats.norm(loc=0.0, scale=math.sqrt(1.0 / asymptotic_fisher(theta))).pdf(midpoints)
    return Histogram(edges=edges, counts=counts, density=density, target_density=target)


def export_histogram(phis: Sequence[float], bins: Union[int, str], path: Union[str, Path],
                     theta: float) -> Path:
    """Write the Phi histogram CSV (bin_left, bin_right, count, density, target_density)"""
    histogram = compute_histogram(phis, bins, theta)
    return save_histogram(histogram.edges, histogram.counts, histogram.density,
                          histogram.target_density, path)


def _summarize(config: ExperimentConfig, theta_index: int, theta: float,
               rows: List[Tuple[int, float, float, Optional[str]]],
               runtime: float) -> ThetaSummary:
    failures = [ReplicationFailure(theta_index, r, message)
                for r, _, _, message in rows if message is not None]
    for failure in failures:
        logger.warning('theta=%g: replication %d excluded (stream key %s): %s',
                       theta, failure.replication, failure.stream_key, failure.message)
    allowed = config.max_failure_fraction * config.replications
    if len(failures) > allowed:
        raise ExperimentError(f'theta={theta}: {len(failures)} of {config.replications} '
                              f'replications failed, above the '
                              f'{config.max_failure_fraction:.3%} limit')

    kept = [row for row in rows if row[3] is None]
    if len(kept) < 2:
        raise ExperimentError(f'theta={theta}: fewer than two usable replications')
    theta_hats = np.array([row[1] for row in kept])
    infos = np.array([row[2] for row in kept])
    phis = math.sqrt(config.n) * (theta_hats - theta)

    pvalue = normality_check(phis, theta) if phis.size >= MIN_NORMALITY_SAMPLES else None
    return ThetaSummary(theta=theta, theta_index=theta_index, n=config.n,
                        replications=config.replications, phis=phis, theta_hats=theta_hats,
                        observed_infos=infos, failures=failures,
                        histogram=compute_histogram(phis, config.bins, theta),
                        normality_pvalue=pvalue, consistency_nu=config.consistency_nu,
                        runtime=runtime)


def run_experiment(config: ExperimentConfig, jobs: Optional[int] = None) -> SummaryReport:
    """Run every theta of ``config`` and aggregate the Phi statistics

    Args:
        config: validated experiment settings
        jobs: worker processes; overrides ``config.jobs``; 1 runs in-process

    Raises:
        ExperimentError: if more than ``max_failure_fraction`` of the
            replications of some theta fail
    """
    config.validate()
    workers = jobs or config.jobs or os.cpu_count() or 1
    started = time.perf_counter()
    cells = []

    with Parallel(n_jobs=workers) as parallel:
        for index, theta in enumerate(config.thetas):
            theta_started = time.perf_counter()
            context = experiment_context(config, theta)
            rows = parallel(delayed(_attempt_replication)(config.seed, index, r, theta, context)
                            for r in range(config.replications))
            summary = _summarize(config, index, theta, rows,
                                 time.perf_counter() - theta_started)
            logger.info('theta=%g: var(Phi)=%.4f (theoretical %.4f) over %d replications '
                        'in %.1fs', theta, summary.empirical_variance,
                        summary.theoretical_variance, summary.phis.size, summary.runtime)
            cells.append(summary)

    report = SummaryReport(config=config, cells=cells, runtime=time.perf_counter() - started)
    logger.info('experiment finished in %.1fs', report.runtime)
    return report


def write_report(report: SummaryReport, output_dir: Union[str, Path]) -> List[Path]:
    """Write report.json, report.csv and the per-theta histogram and Phi files"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = output_dir / 'report.json'
    json_path.write_text(report.to_json() + '\n')
    written.append(json_path)
    written.append(save_table(report.to_frame(), output_dir / 'report.csv'))

    for summary in report.cells:
        tag = theta_tag(summary.theta)
        histogram = summary.histogram
        written.append(save_histogram(histogram.edges, histogram.counts, histogram.density,
                                      histogram.target_density,
                                      output_dir / f'histogram_theta_{tag}.csv'))
        excluded = {f.replication for f in summary.failures}
        kept = [r for r in range(summary.replications) if r not in excluded]
        frame = pd.DataFrame({'replication': kept, 'theta_hat': summary.theta_hats,
                              'phi': summary.phis})
        written.append(save_table(frame, output_dir / f'phi_theta_{tag}.csv'))
    return written
