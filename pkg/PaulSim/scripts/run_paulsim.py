"""paulsim: run configured analyses, reproduce pinned figures, validate geometry files"""

import json
import math
import sys
from argparse import ArgumentParser
from functools import partial
from pathlib import Path
from time import perf_counter

import numpy as np
import pandas as pd

from PaulSim.dynamics.integrator import integrate, trajectory_frame
from PaulSim.dynamics.spectra import (MIN_SECULAR_PERIODS, micromotion_amplitude,
                                      spectral_peaks, spectrum_frame)
from PaulSim.effective.modes import modes_from_coefficients
from PaulSim.effective.pseudopotential import (Grid, harmonicity_residual, map_frame,
                                               pseudopotential_map, trap_depth)
from PaulSim.effective.tradeoff import TrapMetrics, power_estimate, tradeoff_sweep
from PaulSim.fields.geometry import build_geometry, validate_geometry
from PaulSim.fields.quadrupole import quadrupole_coefficients, rf_null
from PaulSim.mathieu.mathieu_core import characteristic_exponent, params_from_coefficients
from PaulSim.scripts.config import GridSpec, load_config
from PaulSim.scripts.figures import FIGURES, reproduce
from PaulSim.scripts.report import ReportBundle, parallel_map
from PaulSim.thermo.cooling import doppler_limit_nbar
from PaulSim.thermo.qubit import QubitCoupling, lamb_dicke, pi_pulse_error, thermal_rabi_shift
from PaulSim.utilities.exceptions import (ConfigError, PaulSimError, SpeciesLookupError,
                                          StabilityError)
from PaulSim.utilities.logger import get_logger, set_verbosity

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_CHECKS = 4

MHZ = 2 * np.pi * 1e6
DIAGNOSTIC_FIELDS = ('line', 'params', 'condition', 'diagnostics', 'mode', 'trace')


###############################################################################
# Per-point analyses

def _stability_row(coeffs, species, drive):
    """(a, q, beta, f) of the strongest RF axis."""
    p = params_from_coefficients(species, drive, coeffs.A, coeffs.A_prime)
    res = characteristic_exponent(p)
    f_sec = res.beta * drive.omega_rf / 2.0 / MHZ if res.stable else float('nan')
    return {'a': p.a, 'q': p.q, 'beta': res.beta, 'stable': res.stable, 'f_sec_MHz': f_sec}


def _modes_point(coeffs, species, tolerate_unstable, drive):
    try:
        modes = modes_from_coefficients(coeffs, drive, species)
    except StabilityError:
        if not tolerate_unstable:
            raise
        row = {'stable': False}
        for i in range(3):
            row.update({'f%d_MHz' % (i + 1): np.nan, 'a%d' % (i + 1): np.nan,
                        'q%d' % (i + 1): np.nan})
        return row, None
    row = {'stable': True}
    for i, (w, p) in enumerate(zip(modes.frequencies, modes.params)):
        row.update({'f%d_MHz' % (i + 1): w / MHZ, 'a%d' % (i + 1): p.a, 'q%d' % (i + 1): p.q})
    return row, modes


def _thermo_point(cooling, qubit, species, modes):
    """Doppler occupations and Lamb-Dicke factors of every confined mode, plus the gate error."""
    if modes is None:
        return [], {'rabi_shift': np.nan, 'pi_error': np.nan}
    rows, states, etas = [], [], []
    for i, (w, free) in enumerate(zip(modes.frequencies, modes.free)):
        if free:
            continue
        state = doppler_limit_nbar(cooling, w)
        eta = lamb_dicke(qubit.wavelength, species, w, qubit.angle)
        states.append(state)
        etas.append(eta)
        rows.append({'mode': i + 1, 'f_MHz': w / MHZ, 'nbar': state.nbar, 'eta': eta,
                     'ld_factor': eta ** 2 * (2 * state.nbar + 1)})
    coupling = QubitCoupling(qubit.rabi, eta=tuple(etas), wavelength=qubit.wavelength)
    return rows, {'rabi_shift': thermal_rabi_shift(coupling, states),
                  'pi_error': pi_pulse_error(coupling, states)}


def _with_sweep(config, rows, repeats=None):
    frame = pd.DataFrame(rows)
    if config.sweep is not None:
        name, values = config.sweep.column()
        if repeats is not None:
            values = np.repeat(values, repeats)
        frame.insert(0, name, values)
    return frame


def _grid(config, coeffs, d):
    """The configured box, or by default a slice through the two strongest RF axes."""
    if config.grid is None:
        spec = GridSpec(half_width=0.5 * d, n=41)
        hw = spec.half_width
        return Grid.box((-hw, -hw, 0.0), (hw, hw, 0.0), spec.n, rotation=coeffs.axes.T,
                        origin=coeffs.center)
    lo, hi = config.grid.bounds()
    return Grid.box(lo, hi, config.grid.n, origin=coeffs.center)


###############################################################################
# run

def run_analyses(config, workers=None, verbose=False):
    """
    Execute the requested analyses in dependency order.

    Fields and the RF null are solved once; sweep points then fan out over
    `workers`. Pseudopotential maps, dynamics and tradeoff curves use the
    unswept drive.

    Returns
    -------
    ReportBundle (not yet written).
    """
    workers = config.workers if workers is None else workers
    species, g = config.species, config.geometry
    t0 = perf_counter()
    trap = build_geometry(g.ref, d=g.d, kappa=g.kappa, endcap_kappa=g.endcap_kappa,
                          mesh_refinement=g.mesh_refinement, cache=g.cache, verbose=verbose)
    drive = config.drive if config.drive.polarity else config.drive.with_(polarity=trap.polarity)
    null = rf_null(trap.basis, drive.polarity, trap.null_guess)
    coeffs = quadrupole_coefficients(trap.basis, drive.dc_weights, drive.polarity, null.position)
    logger.info('fields ready in %.2f s', perf_counter() - t0)

    bundle = ReportBundle('run', config.source)
    bundle.notes += [
        'geometry %s, d = %.4g um' % (trap.name, trap.d * 1e6),
        'RF null at (%.4f, %.4f, %.4f) um, residual field %.3g V/m per V'
        % (*(null.position * 1e6), float(np.linalg.norm(null.residual_field))),
        "RF curvatures A', B', C' = %.6g, %.6g, %.6g 1/m^2 per V" % tuple(coeffs.rf),
        'static curvatures A, B, C = %.6g, %.6g, %.6g 1/m^2 per V' % tuple(coeffs.static),
        'efficiency %.5f, Laplace trace residual %.2e' % (coeffs.efficiency(trap.d),
                                                          coeffs.trace_residual),
    ]
    bundle.notes += ['%s = %.6g um' % (k, v * 1e6) for k, v in sorted(trap.dims.items())
                     if isinstance(v, float) and k != 'kappa']
    drives = config.sweep.drives(drive) if config.sweep is not None else [drive]

    if 'stability' in config.analyses:
        rows = parallel_map(partial(_stability_row, coeffs, species), drives, workers,
                            desc='stability', verbose=verbose)
        bundle.tables['stability'] = _with_sweep(config, rows)

    modes = None
    if {'modes', 'thermo'} & set(config.analyses):
        points = parallel_map(partial(_modes_point, coeffs, species, config.sweep is not None),
                              drives, workers, desc='modes', verbose=verbose)
        modes = [m for _, m in points]
        if 'modes' in config.analyses:
            bundle.tables['modes'] = _with_sweep(config, [row for row, _ in points])
            if modes[0] is not None:
                bundle.notes += ['mode %d axis (%.4f, %.4f, %.4f)%s' % (
                    i + 1, *axis, ' misaligned' if bad else '')
                    for i, (axis, bad) in enumerate(zip(modes[0].axes, modes[0].misaligned))]

    if 'pseudo' in config.analyses:
        grid = _grid(config, coeffs, trap.d)
        pmap = pseudopotential_map(trap.basis, drive, species, grid)
        metrics = TrapMetrics(depth=trap_depth(pmap), harmonicity=harmonicity_residual(pmap),
                              efficiency=coeffs.efficiency(trap.d),
                              power=power_estimate(drive.u_tilde, drive.omega_rf))
        bundle.tables['pseudopotential'] = map_frame(pmap)
        bundle.tables['trap_metrics'] = pd.DataFrame([{
            'depth_eV': metrics.depth, 'harmonicity': metrics.harmonicity,
            'efficiency': metrics.efficiency, 'power_W': metrics.power}])

    if 'dynamics' in config.analyses:
        _dynamics(config, trap, drive, coeffs, bundle, verbose)

    if 'thermo' in config.analyses:
        results = parallel_map(partial(_thermo_point, config.cooling, config.qubit, species),
                               modes, workers, desc='thermo', verbose=verbose)
        counts = [len(rows) for rows, _ in results]
        bundle.tables['thermo_modes'] = _with_sweep(
            config, [r for rows, _ in results for r in rows], repeats=counts)
        bundle.tables['gate'] = _with_sweep(config, [gate for _, gate in results])

    if 'tradeoff' in config.analyses:
        spec = config.tradeoff
        other = trap if trap.name != 'ideal3d' else build_geometry('surface5wire', d=trap.d)
        result = tradeoff_sweep(build_geometry('ideal3d', d=other.d, kappa=spec.kappa_3d),
                                other, species, drive.u_tilde, spec.f_values,
                                f_point=spec.f_point)
        bundle.tables['tradeoff_curves'] = result.curves
        bundle.tables['tradeoff_qlines'] = result.q_lines
        bundle.tables['tradeoff_points'] = result.points
        bundle.tables['tradeoff_ratios'] = pd.DataFrame([{
            'efficiency_3d': result.efficiency_3d, 'efficiency_other': result.efficiency_surf,
            **{k + '_ratio': v for k, v in result.ratios.items()}}])

    logger.info('analyses finished in %.2f s', perf_counter() - t0)
    return bundle


def _dynamics(config, trap, drive, coeffs, bundle, verbose):
    spec = config.dynamics
    periods = spec.periods
    modes = modes_from_coefficients(coeffs, drive, config.species)
    confined = modes.frequencies[~modes.free]
    if periods is None:
        periods = int(math.ceil(1.25 * MIN_SECULAR_PERIODS * drive.omega_rf / confined.min()))
        logger.info('integrating %d RF periods', periods)
    traj = integrate(trap.basis, drive, config.species, coeffs.center + np.asarray(spec.r0),
                     np.zeros(3), periods * drive.period, steps_per_period=spec.steps_per_period,
                     sample_every=spec.sample_every, null=coeffs.center, verbose=verbose)
    bundle.tables['trajectory'] = trajectory_frame(traj)
    if traj.escaped:
        bundle.notes.append('ion escaped after %.4g us' % (traj.escape_time * 1e6))
        return
    bundle.tables['spectrum'] = spectrum_frame(traj)
    spread = traj.positions.var(axis=0)
    rows = []
    for k in range(3):
        if spread[k] <= 1e-6 * spread.max():
            continue
        est = spectral_peaks(traj, axis=k)
        floquet = confined[np.argmin(np.abs(confined - 2 * np.pi * est.secular))]
        lower = est.sidebands.get('lower', (np.nan, np.nan))[0]
        upper = est.sidebands.get('upper', (np.nan, np.nan))[0]
        rows.append({'axis': 'xyz'[k], 'f_secular_MHz': est.secular / 1e6,
                     'f_floquet_MHz': floquet / MHZ, 'rbw_kHz': est.rbw / 1e3,
                     'f_lower_sideband_MHz': lower / 1e6, 'f_upper_sideband_MHz': upper / 1e6,
                     'micromotion_ratio': micromotion_amplitude(traj, axis=k)})
    bundle.tables['dynamics'] = pd.DataFrame(rows)


def run(config_path, out_dir=None, workers=None, verbose=False):
    """Validate the config, run it and write the bundle; returns the bundle."""
    config = load_config(config_path)
    bundle = run_analyses(config, workers=workers, verbose=verbose)
    bundle.write(out_dir or config.output or 'paulsim_out')
    return bundle


def validate(path, mesh_refinement=2000):
    diag = validate_geometry(path, mesh_refinement=mesh_refinement)
    for line in diag.lines():
        print(line)
    return diag


###############################################################################
# Command line

def _diagnostic(err):
    out = {'error': type(err).__name__, 'message': str(err)}
    for name in DIAGNOSTIC_FIELDS:
        value = getattr(err, name, None)
        if value is None or (name == 'trace' and not value):
            continue
        out[name] = list(value)[-3:] if name == 'trace' else value
    return json.dumps(out, default=lambda o: np.asarray(o).tolist(), sort_keys=True)


def build_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument('--out', help='Output directory')
    common.add_argument('--workers', type=int, default=None,
                        help='Worker processes for sweeps (results do not depend on it)')
    common.add_argument('--format', choices=['csv'], default='csv', help='Table format')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for debug output')

    parser = ArgumentParser(prog='paulsim', description='Paul trap modeling toolkit')
    sub = parser.add_subparsers(dest='command', required=True)
    p_run = sub.add_parser('run', parents=[common], help='Run the analyses of a config file')
    p_run.add_argument('--config', required=True, help='Path to the JSON run config')
    p_rep = sub.add_parser('reproduce', parents=[common], help='Reproduce a pinned figure')
    p_rep.add_argument('target', choices=sorted(FIGURES))
    p_val = sub.add_parser('validate', parents=[common], help='Check a geometry file')
    p_val.add_argument('geometry', help='Path to the JSON geometry file')
    p_val.add_argument('--mesh-refinement', type=int, default=2000,
                       help='Target panel count for the mesh quality metrics')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    set_verbosity(args.verbose)
    if args.workers is not None and args.workers < 1:
        logger.error('--workers must be at least 1')
        return EXIT_CONFIG
    verbose = args.verbose > 0
    try:
        if args.command == 'validate':
            return EXIT_OK if validate(args.geometry, args.mesh_refinement).ok else EXIT_CONFIG
        if args.command == 'run':
            run(args.config, args.out, args.workers, verbose)
            return EXIT_OK
        bundle = reproduce(args.target, workers=args.workers or 1, verbose=verbose)
        bundle.write(args.out or Path('paulsim_' + args.target))
        for c in bundle.failed:
            logger.error('check %s failed: %.6g outside [%.6g, %.6g]',
                         c['band'], c['value'], c['low'], c['high'])
        return EXIT_CHECKS if bundle.failed else EXIT_OK
    except (ConfigError, SpeciesLookupError) as err:
        logger.error('%s', err)
        return EXIT_CONFIG
    except PaulSimError as err:
        logger.error('%s', _diagnostic(err))
        return EXIT_PHYSICS


if __name__ == '__main__':
    sys.exit(main())
