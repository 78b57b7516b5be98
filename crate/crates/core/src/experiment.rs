//! Seeded sampling of point pairs and histogram summaries of distances and
//! log-distance-ratios.
//!
//! Pairs are processed in fixed chunks of [`CHUNK`] indices. Each chunk is
//! reduced on its own and the partial results are merged in chunk order, so
//! counts and moments do not depend on the number of threads.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digraph::WeightedDigraph;
use crate::error::{Error, Result};
use crate::joint::JointMetricSpace;
use crate::metric::ElementalMetric;
use crate::rng;

pub const DEFAULT_PAIRS: usize = 100_000;
pub const DEFAULT_BINS: usize = 64;
const CHUNK: u64 = 4096;
const SANDWICH_TOL: f64 = 1e-12;
/// Exhaustive enumeration is used when `4^N` stays at or below this.
const EXHAUSTIVE_LIMIT: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    /// Uniform in `[0, 1]^N`, half-absolute elemental metric.
    CubeVolume,
    /// Uniform on `{0, 1}^N`, discrete elemental metric.
    CubeVertices,
}

impl SampleSource {
    pub fn metric(self) -> ElementalMetric<f64> {
        match self {
            SampleSource::CubeVolume => ElementalMetric::HalfAbsolute,
            SampleSource::CubeVertices => ElementalMetric::Discrete,
        }
    }

    /// The space this source is meant to be evaluated on.
    pub fn space(self, graph: WeightedDigraph<f64>) -> JointMetricSpace<f64> {
        JointMetricSpace::uniform(graph, self.metric())
    }

    pub fn name(self) -> &'static str {
        match self {
            SampleSource::CubeVolume => "cube-volume",
            SampleSource::CubeVertices => "cube-vertices",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Exhaustive for cube vertices when `4^N <= 2^24`, random otherwise.
    #[default]
    Auto,
    Random,
    /// Every ordered pair of cube vertices.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub source: SampleSource,
    /// Pairs to draw in random mode; ignored when enumerating.
    pub pair_count: usize,
    pub seed: u64,
    pub mode: SampleMode,
    /// Sample only `g` and set `h = g`.
    pub identical_pairs: bool,
}

impl SampleSpec {
    pub fn new(source: SampleSource, pair_count: usize, seed: u64) -> Self {
        SampleSpec {
            source,
            pair_count,
            seed,
            mode: SampleMode::Auto,
            identical_pairs: false,
        }
    }

    pub fn with_mode(mut self, mode: SampleMode) -> Self {
        self.mode = mode;
        self
    }

    fn plan(&self, n: usize) -> Result<Plan> {
        let exhaustive_fits = n <= 12 && 4u64.pow(n as u32) <= EXHAUSTIVE_LIMIT;
        let exhaustive = match (self.mode, self.source) {
            (SampleMode::Exhaustive, SampleSource::CubeVolume) => {
                return Err(Error::invalid("exhaustive mode needs the cube-vertices source"))
            }
            (SampleMode::Exhaustive, _) if !exhaustive_fits => {
                return Err(Error::invalid(format!("exhaustive enumeration of 4^{n} pairs is too large")))
            }
            (SampleMode::Exhaustive, _) => true,
            (SampleMode::Auto, SampleSource::CubeVertices) => exhaustive_fits,
            _ => false,
        };
        if !exhaustive && self.pair_count == 0 {
            return Err(Error::invalid("pair_count must be at least 1"));
        }
        let pairs = if exhaustive { 4u64.pow(n as u32) } else { self.pair_count as u64 };
        Ok(Plan {
            n,
            exhaustive,
            pairs,
            spec: *self,
        })
    }
}

struct Plan {
    n: usize,
    exhaustive: bool,
    pairs: u64,
    spec: SampleSpec,
}

impl Plan {
    fn pair(&self, index: u64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let (g, h) = if self.exhaustive {
            let bits = |word: u64| (0..n).map(|k| ((word >> k) & 1) as f64).collect::<Vec<_>>();
            (bits(index >> n), bits(index & ((1 << n) - 1)))
        } else {
            let mut s = rng::stream(self.spec.seed, index);
            let draw = |s: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                match self.spec.source {
                    SampleSource::CubeVolume => (0..n).map(|_| s.gen::<f64>()).collect(),
                    SampleSource::CubeVertices => (0..n).map(|_| f64::from(u8::from(s.gen::<bool>()))).collect(),
                }
            };
            let g = draw(&mut s);
            let h = draw(&mut s);
            (g, h)
        };
        if self.spec.identical_pairs {
            (g.clone(), g)
        } else {
            (g, h)
        }
    }

    fn sampling(&self) -> &'static str {
        if self.exhaustive {
            "exhaustive"
        } else {
            "random"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub quantity: String,
    pub source: SampleSource,
    pub sampling: String,
    pub seed: u64,
    pub pairs_evaluated: u64,
    pub dimension: usize,
}

/// Equal-width histogram plus moments. `variance` is the population variance.
/// With no retained samples the moments are reported as 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub provenance: Provenance,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub count: u64,
    /// Pairs left out of the histogram (log-ratio pairs with `d_null = 0`).
    pub excluded: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
            ExportFormat::Svg => "svg",
        }
    }
}

#[derive(Clone)]
struct Partial {
    counts: Vec<u64>,
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    excluded: u64,
}

impl Partial {
    fn new(bins: usize) -> Self {
        Partial {
            counts: vec![0; bins],
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            excluded: 0,
        }
    }

    fn push(&mut self, v: f64, bin: Option<usize>) {
        if let Some(b) = bin {
            self.counts[b] += 1;
        }
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        if other.count > 0 {
            let (na, nb) = (self.count as f64, other.count as f64);
            let total = na + nb;
            let delta = other.mean - self.mean;
            self.mean += delta * nb / total;
            self.m2 += other.m2 + delta * delta * na * nb / total;
            self.count += other.count;
        }
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.excluded += other.excluded;
        self
    }
}

struct Binning {
    lo: f64,
    hi: f64,
    bins: usize,
}

impl Binning {
    fn index(&self, v: f64) -> usize {
        let t = ((v - self.lo) / (self.hi - self.lo) * self.bins as f64).floor();
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.bins - 1)
        }
    }

    fn edges(&self) -> Vec<f64> {
        let width = (self.hi - self.lo) / self.bins as f64;
        (0..=self.bins).map(|k| if k == self.bins { self.hi } else { self.lo + k as f64 * width }).collect()
    }
}

/// Reduces every pair of the plan. `eval` returns `None` for excluded pairs.
fn reduce<F>(plan: &Plan, binning: Option<&Binning>, eval: &F) -> Result<Partial>
where
    F: Fn(&[f64], &[f64]) -> Result<Option<f64>> + Sync,
{
    let bins = binning.map_or(0, |b| b.bins);
    let chunks = plan.pairs.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Partial::new(bins);
            for index in c * CHUNK..((c + 1) * CHUNK).min(plan.pairs) {
                let (g, h) = plan.pair(index);
                match eval(&g, &h)? {
                    Some(v) => acc.push(v, binning.map(|b| b.index(v))),
                    None => acc.excluded += 1,
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(partials.into_iter().fold(Partial::new(bins), Partial::merge))
}

fn finish(plan: &Plan, quantity: &str, binning: &Binning, acc: Partial) -> DistributionSummary {
    let empty = acc.count == 0;
    DistributionSummary {
        provenance: Provenance {
            quantity: quantity.to_string(),
            source: plan.spec.source,
            sampling: plan.sampling().to_string(),
            seed: plan.spec.seed,
            pairs_evaluated: plan.pairs,
            dimension: plan.n,
        },
        bin_edges: binning.edges(),
        counts: acc.counts,
        mean: if empty { 0.0 } else { acc.mean },
        variance: if empty { 0.0 } else { acc.m2 / acc.count as f64 },
        min: if empty { 0.0 } else { acc.min },
        max: if empty { 0.0 } else { acc.max },
        count: acc.count,
        excluded: acc.excluded,
    }
}

fn check_space(s: &JointMetricSpace<f64>, spec: &SampleSpec) -> Result<Plan> {
    let plan = spec.plan(s.n())?;
    let (g, h) = plan.pair(0);
    s.check_point(&g)?;
    s.check_point(&h)?;
    Ok(plan)
}

/// Histogram of the joint distance over sampled pairs, `bins` equal bins on `[0, 1]`.
pub fn distance_distribution(s: &JointMetricSpace<f64>, spec: &SampleSpec, bins: usize) -> Result<DistributionSummary> {
    if bins == 0 {
        return Err(Error::invalid("bins must be at least 1"));
    }
    let plan = check_space(s, spec)?;
    let binning = Binning { lo: 0.0, hi: 1.0, bins };
    let acc = reduce(&plan, Some(&binning), &|g, h| Ok(Some(s.distance_unchecked(g, h))))?;
    Ok(finish(&plan, "distance", &binning, acc))
}

/// Histogram of `log(d / d_null)`. Pairs with `d_null = 0` are excluded and
/// counted. Every evaluated pair is checked against `d_null <= d <= d_full`.
/// Bins span `[min(0, min), max]` of the retained values.
pub fn log_distance_ratio_distribution(
    s: &JointMetricSpace<f64>,
    spec: &SampleSpec,
    bins: usize,
) -> Result<DistributionSummary> {
    if bins == 0 {
        return Err(Error::invalid("bins must be at least 1"));
    }
    let plan = check_space(s, spec)?;
    let (null, full) = s.reference_spaces();
    let eval = |g: &[f64], h: &[f64]| -> Result<Option<f64>> {
        let d = s.distance_unchecked(g, h);
        let d_null = null.distance_unchecked(g, h);
        let d_full = full.distance_unchecked(g, h);
        if d_null > d + SANDWICH_TOL || d > d_full + SANDWICH_TOL {
            return Err(Error::InvariantViolation(format!(
                "sandwich violated: d_null = {d_null}, d = {d}, d_full = {d_full}"
            )));
        }
        if d_null == 0.0 {
            return Ok(None);
        }
        let ratio = (d / d_null).ln();
        if ratio < -SANDWICH_TOL {
            return Err(Error::InvariantViolation(format!("negative log-distance-ratio {ratio}")));
        }
        Ok(Some(ratio))
    };
    let range = reduce(&plan, None, &eval)?;
    let lo = if range.count == 0 { 0.0 } else { range.min.min(0.0) };
    let hi = if range.count == 0 || range.max <= lo { lo + 1.0 } else { range.max };
    let binning = Binning { lo, hi, bins };
    let acc = reduce(&plan, Some(&binning), &eval)?;
    Ok(finish(&plan, "log-distance-ratio", &binning, acc))
}

impl DistributionSummary {
    pub fn to_csv_string(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# quantity={} source={} sampling={} seed={} pairs={} dimension={} excluded={}",
            p.quantity,
            p.source.name(),
            p.sampling,
            p.seed,
            p.pairs_evaluated,
            p.dimension,
            self.excluded
        );
        let _ = writeln!(
            out,
            "# mean={} variance={} n={} min={} max={}",
            self.mean, self.variance, self.count, self.min, self.max
        );
        out.push_str("bin_left,bin_right,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.bin_edges[k], self.bin_edges[k + 1], c);
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Bar histogram on a fixed 640 x 400 canvas.
    pub fn to_svg_string(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const LEFT: f64 = 50.0;
        const RIGHT: f64 = 20.0;
        const TOP: f64 = 40.0;
        const BOTTOM: f64 = 50.0;
        let plot_w = W - LEFT - RIGHT;
        let plot_h = H - TOP - BOTTOM;
        let peak = self.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let bar_w = plot_w / self.counts.len().max(1) as f64;
        let p = &self.provenance;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="640" height="400" viewBox="0 0 640 400">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="640" height="400" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="320" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{} ({}, {}, seed {}, n = {})</text>"#,
            p.quantity,
            p.source.name(),
            p.sampling,
            p.seed,
            self.count
        );
        for (k, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let h = c as f64 / peak * plot_h;
            let _ = writeln!(
                out,
                r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#4c72b0"/>"##,
                LEFT + k as f64 * bar_w,
                TOP + plot_h - h,
                bar_w,
                h
            );
        }
        let base = TOP + plot_h;
        let _ = writeln!(
            out,
            r#"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
            LEFT + plot_w
        );
        let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="black"/>"#);
        let lo = self.bin_edges.first().copied().unwrap_or(0.0);
        let hi = self.bin_edges.last().copied().unwrap_or(1.0);
        let _ = writeln!(
            out,
            r#"<text x="{LEFT}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{lo:.4}</text>"#,
            base + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{hi:.4}</text>"#,
            LEFT + plot_w,
            base + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="320" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">mean {:.4}, variance {:.4}</text>"#,
            base + 38.0,
            self.mean,
            self.variance
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            TOP + 4.0,
            peak as u64
        );
        out.push_str("</svg>\n");
        out
    }

    pub fn render(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Csv => self.to_csv_string(),
            ExportFormat::Json => self.to_json_string(),
            ExportFormat::Svg => self.to_svg_string(),
        }
    }

    pub fn export(&self, format: ExportFormat, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.render(format)).map_err(|e| Error::io(path, e))
    }
}

/// Reads the `(bin_left, bin_right, count)` rows back from a CSV export.
pub fn parse_csv_counts(text: &str) -> Result<Vec<(f64, f64, u64)>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if !header_seen {
            if line != "bin_left,bin_right,count" {
                return Err(Error::Parse(format!("unexpected header `{line}`")));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse(format!("bad row `{line}`"));
        if cells.len() != 3 {
            return Err(bad());
        }
        rows.push((
            cells[0].parse().map_err(|_| bad())?,
            cells[1].parse().map_err(|_| bad())?,
            cells[2].parse().map_err(|_| bad())?,
        ));
    }
    if !header_seen {
        return Err(Error::Parse("missing column header".into()));
    }
    Ok(rows)
}
