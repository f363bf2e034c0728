"""End-to-end simulation of one configuration."""
import logging
from dataclasses import dataclass

import numpy as np

from .sinr import Downlink
from .volumes import (GridSpec, antenna_centroid_directions, elongation_metrics, extract_volume,
                      sample_field)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    config: object
    link: Downlink
    field: object
    volumes: dict  # threshold_db -> list[CoherentVolume]
    references: np.ndarray

    def elongation(self, threshold_db, u):
        vol = self.volumes[threshold_db][u]
        return None if vol.empty else elongation_metrics(vol)


def calibrated_noise(link, snr_target_db):
    """Noise power putting the median per-user SNR at ``snr_target_db``."""
    gains = link.snr() * link.noise_power
    return float(np.median(gains) / 10.0 ** (snr_target_db / 10.0))


def build_link(config):
    """Downlink for a config, calibrating N_o when it is set to auto."""
    scenario = config.scenario()
    link = Downlink.from_scenario(scenario)
    if config.noise_power is None:
        scenario = scenario.with_noise(calibrated_noise(link, config.snr_target_db))
        link = Downlink.from_scenario(scenario, precoder=link.precoder, paths=link.paths)
    return link


def run(config):
    link = build_link(config)
    lam = link.wavelength
    fld = sample_field(link, config.grid, config.mode) if config.grid is not None else None
    refs = antenna_centroid_directions(link)
    volumes = {}
    for thr_db in config.thresholds_db:
        thr = 10.0 ** (thr_db / 10.0)
        vols = []
        for u in range(link.n_users):
            if config.volume_grid == "plane":
                vol = extract_volume(fld, u, thr, reference=refs[u], search_radius=config.search_radius)
            else:
                half = config.volume_halfwidth or lam
                grid = GridSpec.box(link.users[u], half, config.volume_spacing or lam / 64.0)
                vol = extract_volume(link, u, thr, grid=grid, mode=config.mode, reference=refs[u],
                                     search_radius=config.search_radius)
            vols.append(vol)
        volumes[thr_db] = vols
        log.info("threshold %.2f dB: equivalent radii %s wavelengths", thr_db,
                 np.round([v.equivalent_radius / lam for v in vols], 4))
    return SimulationResult(config, link, fld, volumes, refs)
