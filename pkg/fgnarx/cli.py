"""Command-line front end

Every subcommand writes JSON to stdout (and CSV files when ``--out`` is
given); diagnostics go to stderr. Exit status is 0 on success, 1 on a
domain error and 2 on a usage error.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from fgnarx import __version__
from fgnarx.arx import (ArxSpec, asymptotic_fisher, check_theta, fisher_components,
                        fisher_empirical, mle_estimate, simulate_arx,
                        trajectory_from_observations)
from fgnarx.config import FILE_PREFIX, InputKind, build_design, load_config, parse_input
from fgnarx.design import optimal_transformed_input
from fgnarx.exceptions import FgnArxError
from fgnarx.formats import (load_trajectory_columns, save_design, save_innovation_system,
                            save_noise_path, save_riccati_trace, save_trajectory)
from fgnarx.gaussian_sim import sample_noise, sample_path_dense, stream
from fgnarx.innovations import build_innovation_system
from fgnarx.laplace import (laplace_limit, laplace_mc, phi_chain_laplace_closed,
                            phi_chain_laplace_eigen, riccati_trace, spectral_gap)
from fgnarx.mc import run_experiment, write_report
from fgnarx.noise import NoiseKind, NoiseModel

logger = logging.getLogger(__name__)

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)
DEFAULT_HURST = 0.6


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {text}')
    return value


def seed_int(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError('seed must be an unsigned 64-bit integer')
    return value


def noise_from_args(args: argparse.Namespace) -> NoiseModel:
    """Build the noise model; fGn defaults to H = 0.6"""
    kind = NoiseKind(args.noise)
    hurst = args.hurst
    if kind is NoiseKind.FGN and hurst is None:
        hurst = DEFAULT_HURST
    return NoiseModel(kind, hurst=hurst, phi=args.phi, psi=args.psi)


def _floats(values: np.ndarray) -> List[Optional[float]]:
    return [None if math.isnan(v) else float(v) for v in np.asarray(values, dtype=float)]


class Application:
    """Argument parser and command dispatch"""

    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog='fgnarx',
            description='ARX(1) estimation and optimal input design under '
                        'fractional Gaussian noise')
        self.parser.add_argument('--version', action='version',
                                 version=f'%(prog)s {__version__}')
        self.subparsers = self.parser.add_subparsers(dest='command', metavar='COMMAND')
        self.subparsers.required = True

        self.common = argparse.ArgumentParser(add_help=False)
        self.common.add_argument('--pretty', action='store_true',
                                 help='indent the JSON written to stdout')
        self.common.add_argument('--verbose', '-v', action='count', default=0,
                                 help='log progress to stderr; repeat for debug output')

        self.create_command('simulate-noise', self.on_simulate_noise_command,
                            'draw a noise path', self._simulate_noise_arguments)
        self.create_command('innovations', self.on_innovations_command,
                            'partial correlations and innovation scales',
                            self._innovations_arguments)
        self.create_command('design-input', self.on_design_input_command,
                            'asymptotically optimal input', self._design_input_arguments)
        self.create_command('simulate', self.on_simulate_command,
                            'simulate an ARX(1) trajectory', self._simulate_arguments)
        self.create_command('estimate', self.on_estimate_command,
                            'estimate theta from a trajectory file', self._estimate_arguments)
        self.create_command('fisher', self.on_fisher_command,
                            'finite-N Fisher information', self._fisher_arguments)
        self.create_command('laplace-check', self.on_laplace_check_command,
                            'exact versus Monte Carlo Laplace transforms',
                            self._laplace_check_arguments)
        self.create_command('spectral-gap', self.on_spectral_gap_command,
                            'largest eigenvalue of the chain covariance',
                            self._spectral_gap_arguments)
        self.create_command('experiment', self.on_experiment_command,
                            'run a Monte Carlo study from a configuration file',
                            self._experiment_arguments)

    def create_command(self, name: str, callback: Callable[[argparse.Namespace], Any],
                       help_text: str, arguments: Callable[[argparse.ArgumentParser], None]):
        """Register a subcommand whose handler returns a JSON-serializable result"""
        parser = self.subparsers.add_parser(name, help=help_text, description=help_text,
                                            parents=[self.common])
        arguments(parser)
        parser.set_defaults(handler=callback, subparser=parser)

    def run(self, argv: Optional[List[str]] = None) -> int:
        args = self.parser.parse_args(argv)
        logging.basicConfig(stream=sys.stderr,
                            level=LOG_LEVELS[min(args.verbose, len(LOG_LEVELS) - 1)],
                            format='%(levelname)s %(name)s: %(message)s')
        try:
            result = args.handler(args)
        except FgnArxError as e:
            logger.debug('%s failed', args.command, exc_info=True)
            print(f'error: {e}', file=sys.stderr)
            return 1
        print(json.dumps(result, indent=2 if args.pretty else None))
        return 0

    # argument groups

    def _simulate_noise_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        parser.add_argument('--n', type=positive_int, required=True)
        parser.add_argument('--seed', type=seed_int, required=True)
        parser.add_argument('--dense', action='store_true',
                            help='use the Cholesky sampler instead of circulant embedding')
        parser.add_argument('--out', type=Path, help='write the path as CSV')

    def _innovations_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        parser.add_argument('--n', type=positive_int, required=True)
        parser.add_argument('--out', type=Path, help='write n, beta_n, sigma_n as CSV')

    def _design_input_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        parser.add_argument('--n', type=positive_int, required=True)
        parser.add_argument('--theta', type=float, default=0.5,
                            help='only the sign matters; negative theta gives the '
                                 'alternating design')
        parser.add_argument('--alternate-start', choices=['even', 'odd'], default='even')
        parser.add_argument('--out', type=Path, help='write n, u, v, sigma_next as CSV')

    def _simulate_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        self._add_theta(parser)
        parser.add_argument('--n', type=positive_int, required=True)
        parser.add_argument('--seed', type=seed_int, required=True)
        self._add_input(parser)
        parser.add_argument('--out', type=Path, help='write the trajectory as CSV')

    def _estimate_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        parser.add_argument('--input', required=True,
                            help='trajectory CSV with columns x and v')
        parser.add_argument('--true-theta', type=float,
                            help='reference theta for the score and Phi')

    def _fisher_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        self._add_theta(parser)
        parser.add_argument('--n', type=positive_int, required=True)
        self._add_input(parser)
        parser.add_argument('--reps', type=positive_int,
                            help='also estimate the information by Monte Carlo')
        parser.add_argument('--seed', type=seed_int, help='required with --reps')

    def _laplace_check_arguments(self, parser: argparse.ArgumentParser):
        self._add_noise(parser)
        self._add_theta(parser)
        parser.add_argument('--n', type=positive_int, required=True)
        self._add_input(parser)
        parser.add_argument('--mu', type=float,
                            help='argument of E exp(-mu/(2N) <M>_N)')
        parser.add_argument('--a', type=float,
                            help='argument of the chain transform E exp(-a/2 sum phi^2)')
        parser.add_argument('--reps', type=positive_int, default=5000)
        parser.add_argument('--seed', type=seed_int, help='required with --mu')
        parser.add_argument('--out', type=Path, help='write the Riccati trace as CSV')

    def _spectral_gap_arguments(self, parser: argparse.ArgumentParser):
        self._add_theta(parser)
        parser.add_argument('--n', type=positive_int, required=True)

    def _experiment_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument('--config', type=Path, required=True)
        parser.add_argument('--out', type=Path, help='output directory (overrides the file)')
        parser.add_argument('--jobs', type=positive_int, help='worker processes')
        parser.add_argument('--seed', type=seed_int, help='master seed (overrides the file)')

    def _add_noise(self, parser: argparse.ArgumentParser):
        parser.add_argument('--noise', choices=[k.value for k in NoiseKind], default='fgn')
        parser.add_argument('--hurst', type=float,
                            help=f'Hurst index of fgn noise (default {DEFAULT_HURST})')
        parser.add_argument('--phi', type=float, help='AR(1) coefficient of ar1 noise')
        parser.add_argument('--psi', type=float, help='MA(1) coefficient of ma1 noise')

    def _add_theta(self, parser: argparse.ArgumentParser):
        parser.add_argument('--theta', type=float, required=True)

    def _add_input(self, parser: argparse.ArgumentParser):
        parser.add_argument('--input', default=InputKind.OPTIMAL.value,
                            help="'optimal', 'zero' or 'file:PATH' (CSV with a u column)")

    # handlers

    def on_simulate_noise_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        model = noise_from_args(args)
        rng = stream(args.seed)
        if args.dense:
            xi = sample_path_dense(model, args.n, rng)
        else:
            xi = sample_noise(model, args.n, rng)
        result = {'noise': model.to_dict(), 'n': args.n, 'seed': args.seed}
        if args.out:
            result['path'] = str(save_noise_path(xi, args.out))
        else:
            result['xi'] = _floats(xi)
        return result

    def on_innovations_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        model = noise_from_args(args)
        system = build_innovation_system(model, args.n, kernels=False)
        result = {'noise': model.to_dict(), 'n': args.n,
                  'sigma_limit_estimate': float(system.sigma[-1])}
        if args.out:
            result['path'] = str(save_innovation_system(system, args.out))
        else:
            result['beta'] = _floats(system.beta)
            result['sigma'] = _floats(system.sigma)
        return result

    def on_design_input_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        model = noise_from_args(args)
        system = build_innovation_system(model, args.n)
        design = build_design(InputKind.OPTIMAL.value, system, args.n, args.theta,
                              args.alternate_start)
        result = {'noise': model.to_dict(), 'n': args.n, 'energy': design.energy,
                  'sign_profile': design.sign_profile.value}
        if args.out:
            result['path'] = str(save_design(design, args.out))
        else:
            result['u'] = _floats(design.u)
            result['v'] = _floats(design.v)
        return result

    def on_simulate_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        model = noise_from_args(args)
        check_theta(args.theta)
        system = build_innovation_system(model, args.n)
        design = build_design(args.input, system, args.n, args.theta)
        spec = ArxSpec(theta=args.theta, noise=model, n=args.n, input_u=design.u)
        xi = sample_noise(model, args.n, stream(args.seed))
        traj = simulate_arx(spec, xi, system)
        result = {'noise': model.to_dict(), 'theta': args.theta, 'n': args.n,
                  'seed': args.seed, 'input': args.input, 'energy': design.energy}
        if args.out:
            result['path'] = str(save_trajectory(traj, args.out))
        else:
            result['x'] = _floats(traj.x)
            result['v'] = _floats(traj.v)
        if args.n >= 2:
            result['estimate'] = mle_estimate(traj, system).to_dict()
        return result

    def on_estimate_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        model = noise_from_args(args)
        path = args.input[len(FILE_PREFIX):] if args.input.startswith(FILE_PREFIX) else args.input
        columns = load_trajectory_columns(path)
        n = columns['x'].size
        system = build_innovation_system(model, n)
        traj = trajectory_from_observations(columns['x'], columns['v'], system)
        estimate = mle_estimate(traj, system, true_theta=args.true_theta)
        return {'noise': model.to_dict(), **estimate.to_dict()}

    def _transformed_input(self, args: argparse.Namespace, model: NoiseModel):
        # the optimal and zero inputs need only sigma, so no dense kernels
        kind = parse_input(args.input)
        if kind is InputKind.FILE:
            system = build_innovation_system(model, args.n)
            return system, build_design(args.input, system, args.n, args.theta).v
        system = build_innovation_system(model, args.n, kernels=False)
        if kind is InputKind.ZERO:
            return system, np.zeros(args.n)
        return system, optimal_transformed_input(system, args.n, args.theta)

    def on_fisher_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        model = noise_from_args(args)
        if args.reps is not None and args.seed is None:
            args.subparser.error('--seed is required with --reps')
        limit = asymptotic_fisher(args.theta)
        system, v = self._transformed_input(args, model)
        info_noise, info_input = fisher_components(args.theta, v, system)
        info = info_noise + info_input
        result = {
            'noise': model.to_dict(),
            'theta': args.theta,
            'n': args.n,
            'input': args.input,
            'fisher': info,
            'fisher_noise_part': info_noise,
            'fisher_input_part': info_input,
            'fisher_per_step': info / args.n,
            'asymptotic_fisher': limit,
        }
        if args.reps is not None:
            mean, se = fisher_empirical(args.theta, v, system, args.reps, stream(args.seed))
            result['fisher_empirical'] = mean
            result['fisher_empirical_se'] = se
        return result

    def on_laplace_check_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        if args.mu is None and args.a is None:
            args.subparser.error('one of --mu or --a is required')
        if args.mu is not None and args.seed is None:
            args.subparser.error('--seed is required with --mu')
        model = noise_from_args(args)
        check_theta(args.theta)
        result: Dict[str, Any] = {'noise': model.to_dict(), 'theta': args.theta, 'n': args.n}

        if args.mu is not None:
            system, v = self._transformed_input(args, model)
            trace = riccati_trace(args.theta, args.mu, system, v)
            estimate, se = laplace_mc(args.theta, args.mu, system, v, args.n, args.reps,
                                      stream(args.seed))
            result.update({
                'mu': args.mu,
                'exact': trace.value,
                'monte_carlo': estimate,
                'monte_carlo_se': se,
                'limit': laplace_limit(args.theta, args.mu),
                'determinant_part': trace.determinant_part,
                'determinant_limit': laplace_limit(args.theta, args.mu, part='determinant'),
            })
            if args.out:
                result['path'] = str(save_riccati_trace(trace, args.out))

        if args.a is not None:
            result['a'] = args.a
            result['chain_closed_form'] = phi_chain_laplace_closed(args.theta, args.a, args.n)
            result['chain_eigen'] = phi_chain_laplace_eigen(args.theta, args.a, args.n)
        return result

    def on_spectral_gap_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        check_theta(args.theta)
        if args.n < 2:
            args.subparser.error('--n must be at least 2')
        nu = spectral_gap(args.theta, args.n)
        result = {'theta': args.theta, 'n': args.n, 'nu1': nu}
        if args.theta > 0:
            bound = 1.0 / (1.0 - args.theta) ** 2
            result.update({'bound': bound, 'below_bound': nu < bound})
        return result

    def on_experiment_command(self, args: argparse.Namespace) -> Dict[str, Any]:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.out is not None:
            config.output_dir = str(args.out)
        config.validate()
        report = run_experiment(config, jobs=args.jobs)
        written = write_report(report, config.output_dir)
        return {'output_dir': config.output_dir,
                'files': [str(path) for path in written],
                'report': report.to_dict()}


def main(argv: Optional[List[str]] = None) -> int:
    return Application().run(argv)


if __name__ == '__main__':
    sys.exit(main())
