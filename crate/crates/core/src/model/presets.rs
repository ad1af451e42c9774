//! Built-in device presets at realistic circuit parameters.
//!
//! `section_iv_default`: two qubits and two resonator modes per site in the
//! dispersive regime (detuning 1000 MHz, g = 100 MHz), photon hopping
//! 30 MHz, and the four-drive pattern that generates spin-changing hopping:
//! modulation amplitude 100 MHz (single-transition matrix element 50 MHz)
//! with all drives detuned 100 MHz from their resonator in the rotated
//! frame, phases zero.
//!
//! `resonant_polariton`: one qubit on resonance with one resonator
//! (4 GHz, g = 100 MHz, J = 30 MHz), no drives.
//!
//! `dispersive_soc`: `section_iv_default` with the photon hopping raised to
//! 40 MHz, which puts the spin-changing hop at 10 MHz.

use crate::error::{Error, Result};
use crate::model::{
    BosonDef, CouplingModel, DriveSpec, InterSiteCoupling, QubitDef, SiteSpec, StaticCoupling,
};

pub const SECTION_IV_QUBIT_DOWN: f64 = 3000.0;
pub const SECTION_IV_QUBIT_UP: f64 = 7000.0;
pub const SECTION_IV_MODE_1: f64 = 4000.0;
pub const SECTION_IV_MODE_2: f64 = 8000.0;
pub const SECTION_IV_G: f64 = 100.0;
pub const SECTION_IV_J: f64 = 30.0;
pub const SECTION_IV_DRIVE_F: f64 = 100.0;
pub const SECTION_IV_RAMAN_DETUNING: f64 = 100.0;

pub fn preset(name: &str) -> Result<(SiteSpec, InterSiteCoupling, Vec<DriveSpec>)> {
    match name {
        "section_iv_default" => Ok(two_mode_device(SECTION_IV_J)),
        "dispersive_soc" => Ok(two_mode_device(40.0)),
        "resonant_polariton" => {
            let site = SiteSpec::single(
                SECTION_IV_MODE_1,
                SECTION_IV_MODE_1,
                SECTION_IV_G,
                2,
                CouplingModel::Rwa,
            );
            Ok((site, InterSiteCoupling::uniform(SECTION_IV_J, 1), Vec::new()))
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

fn two_mode_device(j: f64) -> (SiteSpec, InterSiteCoupling, Vec<DriveSpec>) {
    let site = SiteSpec {
        qubits: vec![
            QubitDef { label: "dn".into(), freq: SECTION_IV_QUBIT_DOWN },
            QubitDef { label: "up".into(), freq: SECTION_IV_QUBIT_UP },
        ],
        modes: vec![
            BosonDef { label: "r1".into(), freq: SECTION_IV_MODE_1, photon_cutoff: 1 },
            BosonDef { label: "r2".into(), freq: SECTION_IV_MODE_2, photon_cutoff: 1 },
        ],
        couplings: vec![
            StaticCoupling { qubit: "dn".into(), mode: "r1".into(), g: SECTION_IV_G },
            StaticCoupling { qubit: "up".into(), mode: "r2".into(), g: SECTION_IV_G },
        ],
        coupling_model: CouplingModel::Rwa,
    };
    let coupling = InterSiteCoupling::uniform(j, 2);

    // drive frequencies sit 100 MHz from the photon lines and satisfy
    // nu1 + nu2 = nu4 - nu3 = omega_up - omega_dn
    let delta = SECTION_IV_RAMAN_DETUNING;
    let spin_gap = SECTION_IV_QUBIT_UP - SECTION_IV_QUBIT_DOWN;
    let nu1 = (SECTION_IV_MODE_1 - SECTION_IV_QUBIT_DOWN) - delta;
    let nu2 = spin_gap - nu1;
    let nu4 = (SECTION_IV_MODE_2 - SECTION_IV_QUBIT_DOWN) - delta;
    let nu3 = nu4 - spin_gap;
    let f = SECTION_IV_DRIVE_F;
    let drives = vec![
        DriveSpec { site: 0, qubit: "dn".into(), mode: "r1".into(), amplitude: f, frequency: nu1, phase: 0.0 },
        DriveSpec { site: 1, qubit: "up".into(), mode: "r1".into(), amplitude: f, frequency: nu2, phase: 0.0 },
        DriveSpec { site: 0, qubit: "up".into(), mode: "r2".into(), amplitude: f, frequency: nu3, phase: 0.0 },
        DriveSpec { site: 1, qubit: "dn".into(), mode: "r2".into(), amplitude: f, frequency: nu4, phase: 0.0 },
    ];
    (site, coupling, drives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn section_iv_values() {
        let (site, coupling, drives) = preset("section_iv_default").unwrap();
        assert_abs_diff_eq!(site.boson("r1").unwrap().freq, 4000.0);
        assert_abs_diff_eq!(site.coupling_g("dn", "r1"), 100.0);
        assert_abs_diff_eq!(coupling.hop(0), 30.0);
        assert_eq!(drives.len(), 4);
        // matching condition
        let nu: Vec<f64> = drives.iter().map(|d| d.frequency).collect();
        assert_abs_diff_eq!(nu[0] + nu[1], 4000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nu[3] - nu[2], 4000.0, epsilon = 1e-12);
        // single-transition matrix element f/2 = 50 MHz
        assert_abs_diff_eq!(drives[0].amplitude / 2.0, 50.0);
    }

    #[test]
    fn resonant_polariton_is_resonant() {
        let (site, _, drives) = preset("resonant_polariton").unwrap();
        assert_abs_diff_eq!(site.qubits[0].freq, site.modes[0].freq);
        assert!(drives.is_empty());
    }

    #[test]
    fn dispersive_soc_ratio() {
        let (site, coupling, _) = preset("dispersive_soc").unwrap();
        let ratios = site.dispersive_ratios();
        for (_, _, r) in ratios {
            assert_abs_diff_eq!(r, 0.1, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(coupling.hop(0), 40.0);
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(preset("nope").is_err());
    }
}
