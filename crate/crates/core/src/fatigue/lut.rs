//! Seven-dimensional fatigue lookup table: build, interpolate, persist.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rainflow::{damage_equivalent_load, rainflow};
use super::surrogate::{surrogate_load_case, Channel, LoadCase, SurrogateConfig};
use crate::error::{FarmError, Result};

pub const AXIS_NAMES: [&str; 7] = [
    "wind_speed",
    "ti",
    "yaw",
    "pitch",
    "wake_depth",
    "wake_width",
    "wake_center",
];

/// Index of the deficit-depth axis; the last two axes collapse where it is 0.
const DEPTH_AXIS: usize = 4;
const VALUES_PER_NODE: usize = 8;
const MAGIC: &[u8; 8] = b"FLUT\0\0\0\x01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LutGrid {
    pub wind_speed: Vec<f64>,
    /// Turbulence intensity as a fraction.
    pub ti: Vec<f64>,
    pub yaw: Vec<f64>,
    pub pitch: Vec<f64>,
    pub wake_depth: Vec<f64>,
    pub wake_width: Vec<f64>,
    pub wake_center: Vec<f64>,
}

impl Default for LutGrid {
    fn default() -> Self {
        Self {
            wind_speed: vec![4., 5., 6., 7., 8., 9., 10., 11., 12., 13., 19., 25.],
            ti: vec![0.03, 0.10, 0.20],
            yaw: vec![-30., -20., -10., 0., 10., 20., 30.],
            pitch: vec![-6., -4., -2., 0., 2., 4., 6.],
            wake_depth: vec![0.0, 0.3, 0.5],
            wake_width: vec![0.65, 1.2, 1.73],
            wake_center: vec![-1.5, -0.6, 0.0, 0.6, 1.5],
        }
    }
}

impl LutGrid {
    pub fn axes(&self) -> [&[f64]; 7] {
        [
            &self.wind_speed,
            &self.ti,
            &self.yaw,
            &self.pitch,
            &self.wake_depth,
            &self.wake_width,
            &self.wake_center,
        ]
    }

    pub fn shape(&self) -> [usize; 7] {
        self.axes().map(|a| a.len())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in AXIS_NAMES.iter().zip(self.axes()) {
            if axis.is_empty() {
                return Err(FarmError::Lut(format!("axis {name} is empty")));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(FarmError::Lut(format!(
                    "axis {name} must be strictly increasing"
                )));
            }
        }
        Ok(())
    }

    /// Number of parameter nodes of the dense grid.
    pub fn node_count(&self) -> usize {
        self.shape().iter().product()
    }

    fn zero_depth(&self) -> bool {
        self.wake_depth.contains(&0.0)
    }

    /// Nodes that remain once the wake width and centre are collapsed at
    /// zero deficit depth.
    pub fn distinct_node_count(&self) -> usize {
        let s = self.shape();
        let base = s[0] * s[1] * s[2] * s[3];
        let wake = s[5] * s[6];
        if self.zero_depth() {
            base * (1 + (s[4] - 1) * wake)
        } else {
            base * s[4] * wake
        }
    }

    /// Nodes of the wake-free (zero depth) slice after collapse.
    pub fn wake_free_node_count(&self) -> usize {
        let s = self.shape();
        if self.zero_depth() {
            s[0] * s[1] * s[2] * s[3]
        } else {
            0
        }
    }

    /// Seed-weighted case count of the dense grid.
    pub fn case_count_dense(&self, seeds: &SeedSchedule) -> usize {
        let per_ti = self.node_count() / self.ti.len();
        self.ti.iter().map(|&i| per_ti * seeds.count(i)).sum()
    }

    /// Seed-weighted case count after the zero-depth collapse.
    pub fn case_count(&self, seeds: &SeedSchedule) -> usize {
        let per_ti = self.distinct_node_count() / self.ti.len();
        self.ti.iter().map(|&i| per_ti * seeds.count(i)).sum()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: Self = toml::from_str(text).map_err(|e| FarmError::Config(e.to_string()))?;
        grid.validate()?;
        Ok(grid)
    }
}

/// Number of turbulence seeds per table node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SeedSchedule {
    /// Statistical rule with the default-axis floor; see [`seed_count`].
    Statistical {
        error_target: f64,
        integral_time: f64,
    },
    /// Same number of seeds everywhere.
    Fixed(usize),
}

impl Default for SeedSchedule {
    fn default() -> Self {
        Self::Statistical {
            error_target: 0.01,
            integral_time: 8.5,
        }
    }
}

impl SeedSchedule {
    pub fn count(&self, ti: f64) -> usize {
        match *self {
            Self::Statistical {
                error_target,
                integral_time,
            } => seed_count(ti, error_target, integral_time),
            Self::Fixed(n) => n.max(1),
        }
    }
}

/// Seeds needed for a mean-error target `eps` given integral time `tau`:
/// ceil(I²·2τ/(ε²·600 s)), floored at 3/6/12 seeds for I = 3/10/20 %.
pub fn seed_count(ti: f64, eps: f64, tau: f64) -> usize {
    let raw = (ti * ti * 2.0 * tau / (eps * eps * 600.0)).ceil().max(1.0) as usize;
    let floor = [(0.03, 3usize), (0.10, 6), (0.20, 12)]
        .iter()
        .find(|(i, _)| (ti - i).abs() < 1e-9)
        .map_or(1, |p| p.1);
    raw.max(floor)
}

/// Result of a table query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LutSample {
    /// DEL per channel, kN·m.
    pub del: [f64; 4],
    /// Mean load per channel, kN·m.
    pub mean: [f64; 4],
    /// True if any coordinate was clamped to the axis range.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LutHeader {
    axes: LutGrid,
    channels: Vec<String>,
    wohler: [f64; 4],
    seeds: SeedSchedule,
    surrogate: SurrogateConfig,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FatigueLut {
    pub grid: LutGrid,
    pub wohler: [f64; 4],
    pub seeds: SeedSchedule,
    pub surrogate: SurrogateConfig,
    /// Row-major over the axes (last axis fastest), eight values per node:
    /// four DELs then four means.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub seeds: SeedSchedule,
    /// Wöhler exponent per channel.
    pub wohler: [f64; 4],
    /// Equivalent-cycle frequency, Hz.
    pub f_eq: f64,
}

impl BuildOptions {
    pub fn new(blade: f64, tower: f64) -> Self {
        Self {
            seeds: SeedSchedule::default(),
            wohler: [blade, blade, tower, tower],
            f_eq: 1.0,
        }
    }
}

/// Seed-averaged DELs and means for one load case.
pub fn node_values(
    case: &LoadCase,
    n_seeds: usize,
    wohler: &[f64; 4],
    f_eq: f64,
    cfg: &SurrogateConfig,
) -> Result<[f64; 8]> {
    let mut acc = [0.0; 8];
    for seed in 0..n_seeds as u64 {
        let series = surrogate_load_case(case, seed, cfg)?;
        for (c, s) in series.iter().enumerate() {
            let cycles = rainflow(&s.samples);
            acc[c] += damage_equivalent_load(&cycles, wohler[c], s.duration(), f_eq);
            acc[4 + c] += s.mean();
        }
    }
    for v in acc.iter_mut() {
        *v /= n_seeds as f64;
    }
    Ok(acc)
}

fn unravel(mut flat: usize, shape: &[usize; 7]) -> [usize; 7] {
    let mut idx = [0; 7];
    for k in (0..7).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

fn ravel(idx: &[usize; 7], shape: &[usize; 7]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (i, n)| acc * n + i)
}

impl FatigueLut {
    /// Evaluate the surrogate at every distinct node. Work is spread over
    /// the rayon pool; results are collected in node order, so the table
    /// does not depend on the number of workers.
    pub fn build(grid: LutGrid, cfg: SurrogateConfig, opts: &BuildOptions) -> Result<Self> {
        grid.validate()?;
        let shape = grid.shape();
        let total = grid.node_count();
        let zero_depth = grid.wake_depth.iter().position(|&w| w == 0.0);
        // A node is computed if it is not a duplicate of the collapsed slice.
        let canonical = |idx: &[usize; 7]| -> bool {
            Some(idx[DEPTH_AXIS]) != zero_depth || (idx[5] == 0 && idx[6] == 0)
        };
        let work: Vec<usize> = (0..total)
            .filter(|&f| canonical(&unravel(f, &shape)))
            .collect();
        let axes = grid.axes();
        let computed: Vec<[f64; 8]> = work
            .par_iter()
            .map(|&f| {
                let idx = unravel(f, &shape);
                let mut point = [0.0; 7];
                for k in 0..7 {
                    point[k] = axes[k][idx[k]];
                }
                let case = LoadCase::from_array(point);
                let n = opts.seeds.count(point[1]);
                node_values(&case, n, &opts.wohler, opts.f_eq, &cfg)
            })
            .collect::<Result<_>>()?;

        let mut values = vec![f64::NAN; total * VALUES_PER_NODE];
        for (&f, v) in work.iter().zip(&computed) {
            values[f * VALUES_PER_NODE..(f + 1) * VALUES_PER_NODE].copy_from_slice(v);
        }
        if zero_depth.is_some() {
            for f in 0..total {
                let mut idx = unravel(f, &shape);
                if !canonical(&idx) {
                    idx[5] = 0;
                    idx[6] = 0;
                    let src = ravel(&idx, &shape) * VALUES_PER_NODE;
                    values.copy_within(src..src + VALUES_PER_NODE, f * VALUES_PER_NODE);
                }
            }
        }
        Ok(Self {
            grid,
            wohler: opts.wohler,
            seeds: opts.seeds.clone(),
            surrogate: cfg,
            values,
        })
    }

    pub fn node(&self, idx: [usize; 7]) -> &[f64] {
        let f = ravel(&idx, &self.grid.shape());
        &self.values[f * VALUES_PER_NODE..(f + 1) * VALUES_PER_NODE]
    }

    /// Multilinear interpolation, clamping each coordinate to its axis.
    pub fn interpolate(&self, point: [f64; 7]) -> LutSample {
        let shape = self.grid.shape();
        let axes = self.grid.axes();
        let mut lo = [0usize; 7];
        let mut frac = [0.0f64; 7];
        let mut clamped = false;
        for k in 0..7 {
            let a = axes[k];
            let x = point[k];
            let n = a.len();
            if n == 1 {
                clamped |= x != a[0];
                continue;
            }
            if x <= a[0] {
                clamped |= x < a[0];
                lo[k] = 0;
                frac[k] = 0.0;
            } else if x >= a[n - 1] {
                clamped |= x > a[n - 1];
                lo[k] = n - 2;
                frac[k] = 1.0;
            } else {
                let hi = a.partition_point(|&v| v <= x).min(n - 1);
                lo[k] = hi - 1;
                frac[k] = (x - a[lo[k]]) / (a[hi] - a[lo[k]]);
            }
        }
        let mut out = [0.0; VALUES_PER_NODE];
        for corner in 0..(1usize << 7) {
            let mut w = 1.0;
            let mut idx = lo;
            for k in 0..7 {
                let up = (corner >> k) & 1 == 1;
                if up {
                    if shape[k] == 1 {
                        w = 0.0;
                        break;
                    }
                    idx[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
                if w == 0.0 {
                    break;
                }
            }
            if w == 0.0 {
                continue;
            }
            let f = ravel(&idx, &shape) * VALUES_PER_NODE;
            for (o, v) in out.iter_mut().zip(&self.values[f..f + VALUES_PER_NODE]) {
                *o += w * v;
            }
        }
        let mut del = [0.0; 4];
        let mut mean = [0.0; 4];
        del.copy_from_slice(&out[..4]);
        mean.copy_from_slice(&out[4..]);
        LutSample { del, mean, clamped }
    }

    fn payload(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.payload()))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let payload = self.payload();
        let header = LutHeader {
            axes: self.grid.clone(),
            channels: Channel::ALL.iter().map(|c| c.name().to_string()).collect(),
            wohler: self.wohler,
            seeds: self.seeds.clone(),
            surrogate: self.surrogate.clone(),
            sha256: hex::encode(Sha256::digest(&payload)),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        w.write_all(&payload)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(FarmError::Lut("not a fatigue table file".into()));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut json)?;
        let header: LutHeader = serde_json::from_slice(&json)?;
        header.axes.validate()?;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        let expected = header.axes.node_count() * VALUES_PER_NODE * 8;
        if payload.len() != expected {
            return Err(FarmError::Lut(format!(
                "payload has {} bytes, expected {expected}",
                payload.len()
            )));
        }
        if hex::encode(Sha256::digest(&payload)) != header.sha256 {
            return Err(FarmError::Lut("payload checksum mismatch".into()));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            grid: header.axes,
            wohler: header.wohler,
            seeds: header.seeds,
            surrogate: header.surrogate,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let f = std::fs::File::create(&tmp)?;
            let mut w = std::io::BufWriter::new(f);
            self.write_to(&mut w)?;
            w.flush()?;
        }
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// One row per node: the seven coordinates, four DELs, four means.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = AXIS_NAMES.iter().map(|s| s.to_string()).collect();
        for c in Channel::ALL {
            header.push(format!("del_{}", c.name()));
        }
        for c in Channel::ALL {
            header.push(format!("mean_{}", c.name()));
        }
        out.write_record(&header)?;
        let shape = self.grid.shape();
        let axes = self.grid.axes();
        for f in 0..self.grid.node_count() {
            let idx = unravel(f, &shape);
            let mut row: Vec<String> = (0..7).map(|k| axes[k][idx[k]].to_string()).collect();
            row.extend(
                self.values[f * VALUES_PER_NODE..(f + 1) * VALUES_PER_NODE]
                    .iter()
                    .map(|v| v.to_string()),
            );
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}
