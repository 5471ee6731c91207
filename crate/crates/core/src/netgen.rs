//! Seeded generation of uplink network scenarios.
//!
//! Base stations and users are dropped uniformly on a square. Every
//! (user, BS) link gets a distance-based path loss and one log-normal
//! shadowing draw shared by all bands; every (user, BS, band) triple gets an
//! independent Rayleigh factor. All internal quantities are linear (mW, Hz).

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cluster::Point;
use crate::error::{Error, Result};

/// Path loss in dB at distance `d` meters: `35 log10(d) + 34`.
pub fn path_loss_db(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("path loss distance must be > 0, got {d}")));
    }
    Ok(35.0 * d.log10() + 34.0)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Noise power (mW) collected over a band of `bw_hz` at density `psd_dbm_hz`.
pub fn band_noise_mw(psd_dbm_hz: f64, bw_hz: f64) -> Result<f64> {
    if !(bw_hz > 0.0) {
        return Err(Error::domain(format!("bandwidth must be > 0, got {bw_hz}")));
    }
    Ok(dbm_to_mw(psd_dbm_hz + 10.0 * bw_hz.log10()))
}

/// Deployment and channel parameters. Serialized as flat `key = value` text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_bs: usize,
    pub n_users: usize,
    pub side_m: f64,
    pub n_bands: usize,
    pub band_width_hz: f64,
    /// Carried for bookkeeping only; the path-loss law has no frequency term.
    pub carrier_mhz: f64,
    pub noise_psd_dbm_hz: f64,
    pub max_power_dbm: f64,
    pub shadow_std_db: f64,
    /// Links shorter than this are evaluated at this distance.
    pub min_distance_m: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_bs: 15,
            n_users: 100,
            side_m: 2000.0,
            n_bands: 8,
            band_width_hz: 20e3,
            carrier_mhz: 1800.0,
            noise_psd_dbm_hz: -174.0,
            max_power_dbm: 23.0,
            shadow_std_db: 8.0,
            min_distance_m: 1.0,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.n_bs == 0 || self.n_users == 0 || self.n_bands == 0 {
            return bad("n_bs, n_users and n_bands must all be >= 1");
        }
        if !(self.side_m > 0.0) {
            return bad("side_m must be > 0");
        }
        if !(self.band_width_hz > 0.0) {
            return bad("band_width_hz must be > 0");
        }
        if !(self.shadow_std_db >= 0.0) {
            return bad("shadow_std_db must be >= 0");
        }
        if !(self.min_distance_m > 0.0) {
            return bad("min_distance_m must be > 0");
        }
        if !self.max_power_dbm.is_finite() || !self.noise_psd_dbm_hz.is_finite() {
            return bad("power levels must be finite");
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }
}

/// One drop of the network: geometry plus the full channel tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    pub bs_pos: Vec<Point>,
    pub user_pos: Vec<Point>,
    /// `h[(u * n_bs + b) * n_bands + k]`
    pub h: Vec<Complex64>,
    /// `noise_mw[b * n_bands + k]`
    pub noise_mw: Vec<f64>,
    pub band_width_hz: Vec<f64>,
    pub max_power_mw: Vec<f64>,
}

impl NetworkScenario {
    pub fn n_bs(&self) -> usize {
        self.bs_pos.len()
    }

    pub fn n_users(&self) -> usize {
        self.user_pos.len()
    }

    pub fn n_bands(&self) -> usize {
        self.band_width_hz.len()
    }

    #[inline]
    pub fn h(&self, u: usize, b: usize, k: usize) -> Complex64 {
        self.h[(u * self.n_bs() + b) * self.n_bands() + k]
    }

    #[inline]
    pub fn gain(&self, u: usize, b: usize, k: usize) -> f64 {
        self.h(u, b, k).norm_sqr()
    }

    #[inline]
    pub fn noise(&self, b: usize, k: usize) -> f64 {
        self.noise_mw[b * self.n_bands() + k]
    }

    /// Structural checks: tensor sizes and strictly positive noise/budgets.
    pub fn validate(&self) -> Result<()> {
        let (nb, nu, nk) = (self.n_bs(), self.n_users(), self.n_bands());
        if nb == 0 || nu == 0 || nk == 0 {
            return Err(Error::Format("empty scenario dimension".into()));
        }
        if self.h.len() != nu * nb * nk
            || self.noise_mw.len() != nb * nk
            || self.max_power_mw.len() != nu
        {
            return Err(Error::Format("tensor dimensions do not match counts".into()));
        }
        if self.noise_mw.iter().any(|&n| !(n > 0.0)) {
            return Err(Error::Format("noise power must be > 0".into()));
        }
        if self.max_power_mw.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Format("power budget must be > 0".into()));
        }
        if self.band_width_hz.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Format("bandwidth must be > 0".into()));
        }
        Ok(())
    }

    /// Writes the scenario in the line-oriented `vcell-scenario 1` format.
    ///
    /// ```text
    /// vcell-scenario 1
    /// dims <n_bs> <n_users> <n_bands>
    /// bw <W_0> .. <W_K-1>
    /// bs <x> <y>                       (n_bs lines)
    /// user <x> <y> <pmax_mw>           (n_users lines)
    /// noise <b> <n_0> .. <n_K-1>       (n_bs lines)
    /// h <u> <b> <re_0> <im_0> ..       (n_users * n_bs lines)
    /// ```
    ///
    /// Floats are written in shortest round-trip exponent form, so
    /// `load(dump(s)) == s` bit for bit.
    pub fn dump(&self) -> String {
        let (nb, nu, nk) = (self.n_bs(), self.n_users(), self.n_bands());
        let mut out = String::new();
        let _ = writeln!(out, "vcell-scenario 1");
        let _ = writeln!(out, "dims {nb} {nu} {nk}");
        out.push_str("bw");
        for w in &self.band_width_hz {
            let _ = write!(out, " {w:e}");
        }
        out.push('\n');
        for p in &self.bs_pos {
            let _ = writeln!(out, "bs {:e} {:e}", p.x, p.y);
        }
        for (p, pmax) in self.user_pos.iter().zip(&self.max_power_mw) {
            let _ = writeln!(out, "user {:e} {:e} {:e}", p.x, p.y, pmax);
        }
        for b in 0..nb {
            let _ = write!(out, "noise {b}");
            for k in 0..nk {
                let _ = write!(out, " {:e}", self.noise(b, k));
            }
            out.push('\n');
        }
        for u in 0..nu {
            for b in 0..nb {
                let _ = write!(out, "h {u} {b}");
                for k in 0..nk {
                    let z = self.h(u, b, k);
                    let _ = write!(out, " {:e} {:e}", z.re, z.im);
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn load(text: &str) -> Result<Self> {
        let fmt = |msg: String| Error::Format(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(l) if l.trim() == "vcell-scenario 1" => {}
            other => return Err(fmt(format!("bad header {other:?}"))),
        }
        let dims: Vec<usize> = parse_fields(lines.next(), "dims")?;
        let [nb, nu, nk] = dims[..] else {
            return Err(fmt("dims needs three counts".into()));
        };
        let band_width_hz: Vec<f64> = parse_fields(lines.next(), "bw")?;
        if band_width_hz.len() != nk {
            return Err(fmt("bw count mismatch".into()));
        }
        let mut bs_pos = Vec::with_capacity(nb);
        for _ in 0..nb {
            let v: Vec<f64> = parse_fields(lines.next(), "bs")?;
            if v.len() != 2 {
                return Err(fmt("bs line needs x y".into()));
            }
            bs_pos.push(Point::new(v[0], v[1]));
        }
        let mut user_pos = Vec::with_capacity(nu);
        let mut max_power_mw = Vec::with_capacity(nu);
        for _ in 0..nu {
            let v: Vec<f64> = parse_fields(lines.next(), "user")?;
            if v.len() != 3 {
                return Err(fmt("user line needs x y pmax".into()));
            }
            user_pos.push(Point::new(v[0], v[1]));
            max_power_mw.push(v[2]);
        }
        let mut noise_mw = vec![0.0; nb * nk];
        for b in 0..nb {
            let v: Vec<f64> = parse_fields(lines.next(), "noise")?;
            if v.len() != nk + 1 || v[0] as usize != b {
                return Err(fmt(format!("noise line {b} malformed")));
            }
            noise_mw[b * nk..(b + 1) * nk].copy_from_slice(&v[1..]);
        }
        let mut h = vec![Complex64::new(0.0, 0.0); nu * nb * nk];
        for u in 0..nu {
            for b in 0..nb {
                let v: Vec<f64> = parse_fields(lines.next(), "h")?;
                if v.len() != 2 + 2 * nk || v[0] as usize != u || v[1] as usize != b {
                    return Err(fmt(format!("h line ({u},{b}) malformed")));
                }
                for k in 0..nk {
                    h[(u * nb + b) * nk + k] = Complex64::new(v[2 + 2 * k], v[3 + 2 * k]);
                }
            }
        }
        let scenario = Self {
            bs_pos,
            user_pos,
            h,
            noise_mw,
            band_width_hz,
            max_power_mw,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn save_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.dump()).map_err(|e| Error::io(path, e))
    }

    pub fn load_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::load(&text)
    }
}

fn parse_fields<T: std::str::FromStr>(line: Option<&str>, tag: &str) -> Result<Vec<T>> {
    let line = line.ok_or_else(|| Error::Format(format!("missing `{tag}` line")))?;
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(Error::Format(format!("expected `{tag}` line, got {line:?}")));
    }
    it.map(|s| {
        s.parse()
            .map_err(|_| Error::Format(format!("bad number {s:?} in `{tag}` line")))
    })
    .collect()
}

/// Draws a scenario from stream 0 of the configured seed.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<NetworkScenario> {
    generate_scenario_stream(cfg, 0)
}

/// Draws a scenario from an independent sub-stream of the configured seed.
///
/// Realization `r` of an experiment uses stream `r`, so the scenario does
/// not depend on which worker generates it.
pub fn generate_scenario_stream(cfg: &ScenarioConfig, stream: u64) -> Result<NetworkScenario> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let (nb, nu, nk) = (cfg.n_bs, cfg.n_users, cfg.n_bands);
    let drop_point = |rng: &mut ChaCha20Rng| {
        Point::new(
            rng.random::<f64>() * cfg.side_m,
            rng.random::<f64>() * cfg.side_m,
        )
    };
    let bs_pos: Vec<Point> = (0..nb).map(|_| drop_point(&mut rng)).collect();
    let user_pos: Vec<Point> = (0..nu).map(|_| drop_point(&mut rng)).collect();

    let shadow = Normal::new(0.0, cfg.shadow_std_db).map_err(|e| Error::Config(e.to_string()))?;
    let fading_scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = Vec::with_capacity(nu * nb * nk);
    for u in 0..nu {
        for b in 0..nb {
            let d = user_pos[u].dist(&bs_pos[b]).max(cfg.min_distance_m);
            let s_db = shadow.sample(&mut rng);
            let amp = 10f64.powf((s_db - path_loss_db(d)?) / 20.0);
            for _ in 0..nk {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                h.push(Complex64::new(re, im) * (fading_scale * amp));
            }
        }
    }

    let noise = band_noise_mw(cfg.noise_psd_dbm_hz, cfg.band_width_hz)?;
    Ok(NetworkScenario {
        bs_pos,
        user_pos,
        h,
        noise_mw: vec![noise; nb * nk],
        band_width_hz: vec![cfg.band_width_hz; nk],
        max_power_mw: vec![dbm_to_mw(cfg.max_power_dbm); nu],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn path_loss_values() {
        assert!(close(path_loss_db(10.0).unwrap(), 69.0, 1e-12));
        assert!(close(path_loss_db(1000.0).unwrap(), 139.0, 1e-12));
        assert!(close(path_loss_db(100.0).unwrap(), 104.0, 1e-12));
        assert!(path_loss_db(0.0).is_err());
        assert!(path_loss_db(-3.0).is_err());
    }

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_mw(0.0), 1.0);
        assert!(close(dbm_to_mw(23.0), 199.526_231_496_887_96, 1e-12));
        assert!(close(dbm_to_mw(-30.0), 1e-3, 1e-12));
        assert!(close(mw_to_dbm(dbm_to_mw(17.5)), 17.5, 1e-12));
    }

    #[test]
    fn band_noise_values() {
        // -174 dBm/Hz + 10 log10(20 kHz) = -130.9897 dBm
        assert!(close(band_noise_mw(-174.0, 20e3).unwrap(), 7.962_143_411_069_94e-14, 1e-9));
        assert!(close(band_noise_mw(-174.0, 1.0).unwrap(), 10f64.powf(-17.4), 1e-12));
        assert!(close(band_noise_mw(0.0, 10.0).unwrap(), 10.0, 1e-12));
        assert!(band_noise_mw(-174.0, 0.0).is_err());
    }

    #[test]
    fn default_setup_shapes() {
        let cfg = ScenarioConfig::default();
        let s = generate_scenario(&cfg).unwrap();
        assert_eq!((s.n_users(), s.n_bs(), s.n_bands()), (100, 15, 8));
        assert_eq!(s.h.len(), 100 * 15 * 8);
        s.validate().unwrap();
        for p in s.bs_pos.iter().chain(&s.user_pos) {
            assert!((0.0..=2000.0).contains(&p.x) && (0.0..=2000.0).contains(&p.y));
        }
    }

    #[test]
    fn same_seed_same_scenario_and_streams_differ() {
        let cfg = ScenarioConfig {
            seed: 99,
            ..Default::default()
        };
        let a = generate_scenario(&cfg).unwrap();
        let b = generate_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario_stream(&cfg, 1).unwrap();
        assert_ne!(a.h, c.h);
    }

    #[test]
    fn dump_load_is_bit_exact() {
        let cfg = ScenarioConfig {
            n_bs: 3,
            n_users: 4,
            n_bands: 2,
            ..Default::default()
        };
        let s = generate_scenario(&cfg).unwrap();
        let back = NetworkScenario::load(&s.dump()).unwrap();
        assert_eq!(s, back);
        assert!(NetworkScenario::load("vcell-scenario 2\n").is_err());
    }

    #[test]
    fn config_round_trips_through_text() {
        let cfg = ScenarioConfig {
            seed: 7,
            n_bs: 10,
            n_users: 80,
            side_m: 1000.0,
            ..Default::default()
        };
        let text = cfg.to_toml_string();
        assert!(text.contains("n_bs = 10"));
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
        assert!(ScenarioConfig::from_toml_str("n_bs = 0").is_err());
        assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn mean_power_matches_path_loss_without_shadowing() {
        // One BS, one user, n_bands draws per scenario; 10^4 fading samples.
        let d = 150.0;
        let expected = 10f64.powf(-path_loss_db(d).unwrap() / 10.0);
        let cfg = ScenarioConfig {
            n_bs: 1,
            n_users: 1,
            n_bands: 100,
            shadow_std_db: 0.0,
            ..Default::default()
        };
        let mut sum = 0.0;
        let mut count = 0usize;
        for stream in 0..100 {
            let mut s = generate_scenario_stream(&cfg, stream).unwrap();
            // Relocate to the fixed distance by rescaling with the drawn one.
            let d_drawn = s.user_pos[0].dist(&s.bs_pos[0]).max(1.0);
            let fix = 10f64.powf((path_loss_db(d_drawn).unwrap() - path_loss_db(d).unwrap()) / 10.0);
            for z in &mut s.h {
                sum += z.norm_sqr() * fix;
                count += 1;
            }
        }
        assert_eq!(count, 10_000);
        let mean = sum / count as f64;
        assert!(close(mean, expected, 0.03), "mean {mean:e} vs {expected:e}");
    }
}
