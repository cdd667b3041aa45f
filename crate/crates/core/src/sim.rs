//! Monte Carlo coverage of the quantile confidence intervals.
//!
//! Every replication draws its own random stream: the master seed seeds a
//! ChaCha8 generator and the replication index selects its stream. Results are
//! reduced in replication order, so serial and parallel runs agree bit for bit.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{bin_sample, BinningPolicy, Distribution};
use crate::error::{check_probability, Error, Result};
use crate::estimate::{EstimatorOptions, FittedModel, Method};
use crate::interval::ci_single;

fn default_level() -> f64 {
    0.95
}

/// One row of a coverage table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimCell {
    pub distribution: Distribution,
    pub n: usize,
    pub p: f64,
    pub method: Method,
    #[serde(default)]
    pub binning: BinningPolicy,
    #[serde(default = "default_level")]
    pub level: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "EstimatorOptions::for_simulation")]
    pub options: EstimatorOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub reps: usize,
    /// Fraction of successful replications whose interval covers the true quantile.
    pub coverage: f64,
    pub avg_width: f64,
    /// Replications where binning, estimation or the interval failed.
    pub failures: usize,
    /// Message of the first failure, if any.
    pub first_failure: Option<String>,
}

fn validate_common(dist: &Distribution, n: usize, method: Method, level: f64, reps: usize) -> Result<()> {
    dist.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sample size must be at least 2 (got {n})")));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    check_probability(level)?;
    if method == Method::Gld && !dist.is_unimodal() {
        return Err(Error::InvalidArgument(format!(
            "the GLD method assumes a unimodal distribution; {} is not",
            dist.family()
        )));
    }
    Ok(())
}

impl SimCell {
    pub fn validate(&self) -> Result<()> {
        validate_common(&self.distribution, self.n, self.method, self.level, self.reps)?;
        check_probability(self.p)?;
        self.binning.validate()
    }
}

/// Independent stream for replication `rep`.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn fit_replication(
    dist: &Distribution,
    n: usize,
    method: Method,
    binning: &BinningPolicy,
    options: &EstimatorOptions,
    seed: u64,
    rep: usize,
) -> Result<(FittedModel, f64)> {
    let mut rng = replication_rng(seed, rep);
    let xs = dist.sample(n, &mut rng);
    let gd = bin_sample(&xs, binning, method.requires_means())?;
    Ok((FittedModel::fit(&gd, method, options)?, gd.n()))
}

/// Running totals over replications, folded in replication order.
#[derive(Default)]
struct Tally {
    covered: usize,
    successes: usize,
    width_sum: f64,
    failures: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn add(&mut self, outcome: &Result<(bool, f64)>) {
        match outcome {
            Ok((covers, width)) => {
                self.successes += 1;
                self.covered += usize::from(*covers);
                self.width_sum += width;
            }
            Err(e) => {
                self.failures += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some(e.to_string());
                }
            }
        }
    }

    fn finish(self, reps: usize) -> Result<SimResult> {
        if self.successes == 0 {
            return Err(Error::AllReplicationsFailed(reps, self.first_failure.unwrap_or_default()));
        }
        Ok(SimResult {
            reps,
            coverage: self.covered as f64 / self.successes as f64,
            avg_width: self.width_sum / self.successes as f64,
            failures: self.failures,
            first_failure: self.first_failure,
        })
    }
}

/// Runs all replications of `cell` and reports coverage of the true quantile.
pub fn run_cell(cell: &SimCell) -> Result<SimResult> {
    cell.validate()?;
    let truth = cell.distribution.quantile(cell.p)?;
    let outcomes: Vec<Result<(bool, f64)>> = (0..cell.reps)
        .into_par_iter()
        .map(|rep| {
            let (model, n) = fit_replication(
                &cell.distribution,
                cell.n,
                cell.method,
                &cell.binning,
                &cell.options,
                cell.seed,
                rep,
            )?;
            let ci = ci_single(&model.estimate(cell.p)?, n, cell.level)?;
            Ok((ci.contains(truth), ci.width()))
        })
        .collect();
    let mut tally = Tally::default();
    outcomes.iter().for_each(|o| tally.add(o));
    tally.finish(cell.reps)
}

#[derive(Debug)]
pub struct TableRow {
    pub cell: SimCell,
    pub result: Result<SimResult>,
}

/// Runs each cell in order. A failing cell becomes a failed row; the table
/// carries on. `progress` is called after each cell with `(done, total)`.
pub fn run_table(cells: &[SimCell], mut progress: impl FnMut(usize, usize, &TableRow)) -> Vec<TableRow> {
    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let row = TableRow {
            cell: cell.clone(),
            result: run_cell(cell),
        };
        progress(rows.len() + 1, cells.len(), &row);
        rows.push(row);
    }
    rows
}

pub const TABLE_HEADER: [&str; 10] = [
    "family", "params", "n", "p", "method", "bins", "coverage", "width", "failures", "error",
];

/// Writes rows as CSV. Floats use the shortest representation that parses
/// back to the same value, so equal results give equal bytes.
pub fn write_table<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(TABLE_HEADER).map_err(io)?;
    for row in rows {
        let c = &row.cell;
        let (coverage, width, failures, error) = match &row.result {
            Ok(r) => (r.coverage.to_string(), r.avg_width.to_string(), r.failures, String::new()),
            Err(e) => (String::new(), String::new(), c.reps, e.to_string()),
        };
        w.write_record([
            c.distribution.family().to_string(),
            c.distribution.params_label(),
            c.n.to_string(),
            c.p.to_string(),
            c.method.name().to_string(),
            c.binning.label(),
            coverage,
            width,
            failures.to_string(),
            error,
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn table_to_csv(rows: &[TableRow]) -> String {
    let mut buf = Vec::new();
    write_table(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Coverage over a grid of `p` for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub distribution: Distribution,
    pub n: usize,
    pub method: Method,
    #[serde(default)]
    pub binning: BinningPolicy,
    #[serde(default = "default_level")]
    pub level: f64,
    pub reps: usize,
    pub seed: u64,
    pub grid: usize,
    #[serde(default = "EstimatorOptions::for_simulation")]
    pub options: EstimatorOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub coverage: Option<f64>,
    pub avg_width: Option<f64>,
    pub failures: usize,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        validate_common(&self.distribution, self.n, self.method, self.level, self.reps)?;
        if self.grid < 2 {
            return Err(Error::InvalidArgument(format!("grid size must be at least 2 (got {})", self.grid)));
        }
        self.binning.validate()
    }

    /// `p_i = i / (grid + 1)` for `i = 1..=grid`.
    pub fn probabilities(&self) -> Vec<f64> {
        (1..=self.grid).map(|i| i as f64 / (self.grid + 1) as f64).collect()
    }
}

/// Coverage at every grid point. Each replication draws one sample and fits
/// once; that fit is evaluated at all grid points.
pub fn coverage_curve(spec: &CurveSpec) -> Result<Vec<CurvePoint>> {
    spec.validate()?;
    let ps = spec.probabilities();
    let truths = ps
        .iter()
        .map(|&p| spec.distribution.quantile(p))
        .collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<Vec<Result<(bool, f64)>>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            match fit_replication(
                &spec.distribution,
                spec.n,
                spec.method,
                &spec.binning,
                &spec.options,
                spec.seed,
                rep,
            ) {
                Ok((model, n)) => ps
                    .iter()
                    .zip(&truths)
                    .map(|(&p, &truth)| {
                        let ci = ci_single(&model.estimate(p)?, n, spec.level)?;
                        Ok((ci.contains(truth), ci.width()))
                    })
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    ps.iter().map(|_| Err(Error::InvalidArgument(msg.clone()))).collect()
                }
            }
        })
        .collect();
    let mut tallies: Vec<Tally> = ps.iter().map(|_| Tally::default()).collect();
    for rep in &outcomes {
        for (tally, outcome) in tallies.iter_mut().zip(rep) {
            tally.add(outcome);
        }
    }
    Ok(ps
        .iter()
        .zip(tallies)
        .map(|(&p, t)| {
            let failures = t.failures;
            match t.finish(spec.reps) {
                Ok(r) => CurvePoint {
                    p,
                    coverage: Some(r.coverage),
                    avg_width: Some(r.avg_width),
                    failures,
                },
                Err(_) => CurvePoint {
                    p,
                    coverage: None,
                    avg_width: None,
                    failures,
                },
            }
        })
        .collect())
}

pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "coverage", "width", "failures"]).expect("writing to memory");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for pt in points {
        w.write_record([pt.p.to_string(), opt(pt.coverage), opt(pt.avg_width), pt.failures.to_string()])
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}

/// Cross product of factor levels, expanded in the order
/// distribution, n, p, method, bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factorial {
    pub distributions: Vec<Distribution>,
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_bins")]
    pub bins: Vec<BinningPolicy>,
    #[serde(default = "default_level")]
    pub level: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "EstimatorOptions::for_simulation")]
    pub options: EstimatorOptions,
    /// Drop GLD cells on multimodal distributions instead of rejecting the config.
    #[serde(default = "default_true")]
    pub skip_invalid: bool,
}

fn default_bins() -> Vec<BinningPolicy> {
    vec![BinningPolicy::default()]
}

fn default_true() -> bool {
    true
}

impl Factorial {
    pub fn cells(&self) -> Vec<SimCell> {
        let mut cells = Vec::new();
        for d in &self.distributions {
            for &n in &self.n {
                for &p in &self.p {
                    for &method in &self.methods {
                        if self.skip_invalid && method == Method::Gld && !d.is_unimodal() {
                            continue;
                        }
                        for binning in &self.bins {
                            cells.push(SimCell {
                                distribution: d.clone(),
                                n,
                                p,
                                method,
                                binning: binning.clone(),
                                level: self.level,
                                reps: self.reps,
                                seed: self.seed,
                                options: self.options.clone(),
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Experiment file: explicit `[[cells]]`, optional `[factorial]` (expanded after them).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub cells: Vec<SimCell>,
    #[serde(default)]
    pub factorial: Option<Factorial>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = parse_toml(text)?;
        for (i, cell) in config.cells.iter().enumerate() {
            cell.validate().map_err(|e| Error::Config {
                path: format!("cells[{i}]"),
                message: e.to_string(),
            })?;
        }
        for (i, cell) in config.factorial.iter().flat_map(Factorial::cells).enumerate() {
            cell.validate().map_err(|e| Error::Config {
                path: format!("factorial (cell {i}: {} {})", cell.distribution.family(), cell.method),
                message: e.to_string(),
            })?;
        }
        Ok(config)
    }

    pub fn all_cells(&self) -> Vec<SimCell> {
        let mut cells = self.cells.clone();
        if let Some(f) = &self.factorial {
            cells.extend(f.cells());
        }
        cells
    }
}

impl CurveSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: CurveSpec = parse_toml(text)?;
        spec.validate().map_err(|e| Error::Config {
            path: ".".into(),
            message: e.to_string(),
        })?;
        Ok(spec)
    }
}

/// Deserializes TOML, reporting the key path of the first offending value.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config {
            path,
            message: inner.message().trim().to_string(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_cell(method: Method, reps: usize) -> SimCell {
        SimCell {
            distribution: Distribution::standard_normal(),
            n: 200,
            p: 0.5,
            method,
            binning: BinningPolicy::fixed_count(10),
            level: 0.95,
            reps,
            seed: 7,
            options: EstimatorOptions::for_simulation(),
        }
    }

    #[test]
    fn single_replication_covers_or_not() {
        let r = run_cell(&normal_cell(Method::Histogram, 1)).unwrap();
        assert!(r.coverage == 0.0 || r.coverage == 1.0);
        assert_eq!(r.reps, 1);
    }

    #[test]
    fn deterministic_and_order_free() {
        let cell = normal_cell(Method::FrequencyPolygon, 64);
        let a = run_cell(&cell).unwrap();
        let b = run_cell(&cell).unwrap();
        assert_eq!(a, b);
        // Serial, reversed execution order gives the same totals.
        let truth = cell.distribution.quantile(cell.p).unwrap();
        let mut outcomes: Vec<(usize, Result<(bool, f64)>)> = (0..cell.reps)
            .rev()
            .map(|rep| {
                let r = fit_replication(&cell.distribution, cell.n, cell.method, &cell.binning, &cell.options, cell.seed, rep)
                    .and_then(|(m, n)| ci_single(&m.estimate(cell.p)?, n, cell.level))
                    .map(|ci| (ci.contains(truth), ci.width()));
                (rep, r)
            })
            .collect();
        outcomes.sort_by_key(|(rep, _)| *rep);
        let mut tally = Tally::default();
        outcomes.iter().for_each(|(_, o)| tally.add(o));
        assert_eq!(tally.finish(cell.reps).unwrap(), a);
    }

    #[test]
    fn streams_differ_between_replications() {
        use rand::Rng;
        let a: u64 = replication_rng(1, 0).gen();
        let b: u64 = replication_rng(1, 1).gen();
        let c: u64 = replication_rng(2, 0).gen();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, replication_rng(1, 0).gen::<u64>());
    }

    #[test]
    fn gld_rejected_for_mixture() {
        let mut cell = normal_cell(Method::Gld, 10);
        cell.distribution = Distribution::bimodal_mixture();
        assert!(matches!(run_cell(&cell), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn all_failures_is_an_error() {
        // Unequal explicit edges make every frequency-polygon fit fail.
        let mut cell = normal_cell(Method::FrequencyPolygon, 5);
        cell.binning = BinningPolicy {
            mode: crate::distributions::BinMode::FixedEdges(vec![-10.0, 0.0, 1.0, 10.0]),
            range: crate::distributions::BinRange::SampleMinMax,
        };
        assert!(matches!(run_cell(&cell), Err(Error::AllReplicationsFailed(5, _))));
        let rows = run_table(&[cell], |_, _, _| {});
        let csv = table_to_csv(&rows);
        assert!(csv.lines().nth(1).unwrap().contains("all 5 replications failed"));
    }

    #[test]
    fn empty_table_has_header_only() {
        assert_eq!(table_to_csv(&[]), format!("{}\n", TABLE_HEADER.join(",")));
    }

    #[test]
    fn curve_grid() {
        let spec = CurveSpec {
            distribution: Distribution::standard_normal(),
            n: 200,
            method: Method::Histogram,
            binning: BinningPolicy::default(),
            level: 0.95,
            reps: 20,
            seed: 3,
            grid: 2,
            options: EstimatorOptions::for_simulation(),
        };
        let pts = coverage_curve(&spec).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].p, 1.0 / 3.0);
        assert_eq!(pts[1].p, 2.0 / 3.0);
        assert_eq!(pts, coverage_curve(&spec).unwrap());
    }

    #[test]
    fn curve_point_matches_cell() {
        let spec = CurveSpec {
            distribution: Distribution::standard_normal(),
            n: 300,
            method: Method::LinearInterpolation,
            binning: BinningPolicy::default(),
            level: 0.9,
            reps: 30,
            seed: 11,
            grid: 3,
            options: EstimatorOptions::for_simulation(),
        };
        let pts = coverage_curve(&spec).unwrap();
        let cell = SimCell {
            distribution: spec.distribution.clone(),
            n: spec.n,
            p: 0.5,
            method: spec.method,
            binning: spec.binning.clone(),
            level: spec.level,
            reps: spec.reps,
            seed: spec.seed,
            options: spec.options.clone(),
        };
        let r = run_cell(&cell).unwrap();
        assert_eq!(pts[1].coverage, Some(r.coverage));
        assert_eq!(pts[1].avg_width, Some(r.avg_width));
    }

    #[test]
    fn config_parses_cells_and_factorial() {
        let text = r#"
[[cells]]
distribution = { family = "normal", mu = 0.0, sigma = 1.0 }
n = 500
p = 0.5
method = "histogram"
binning = { bins = 5 }
reps = 10
seed = 1

[factorial]
distributions = [
  { family = "exponential", rate = 1.0 },
  { family = "normal-mixture", mu = [10.0, 4.0], sigma = [1.0, 2.0], weight = [0.4, 0.6] },
]
n = [100]
p = [0.25, 0.5]
methods = ["histogram", "gld"]
bins = [{ bins = 5 }, { bins = 20 }]
reps = 10
seed = 2
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.cells.len(), 1);
        assert_eq!(cfg.cells[0].level, 0.95);
        assert_eq!(cfg.cells[0].binning, BinningPolicy::fixed_count(5));
        // exponential: 2 p × 2 methods × 2 bins; mixture drops gld: 2 × 1 × 2.
        assert_eq!(cfg.all_cells().len(), 1 + 8 + 4);
    }

    #[test]
    fn config_errors_name_the_key() {
        let text = r#"
[[cells]]
distribution = { family = "normal", mu = 0.0, sigma = 1.0 }
n = 500
p = 0.5
method = "histogram"
reps = "many"
seed = 1
"#;
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert_eq!(err.location().as_deref(), Some("cells[0].reps"));

        let bad_p = text.replace("\"many\"", "10").replace("p = 0.5", "p = 1.5");
        let err = ExperimentConfig::from_toml(&bad_p).unwrap_err();
        assert_eq!(err.location().as_deref(), Some("cells[0]"));
        assert!(err.to_string().contains("1.5"));

        let unknown = text.replace("reps = \"many\"", "reps = 3\ncolour = 1");
        let err = ExperimentConfig::from_toml(&unknown).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }
}
