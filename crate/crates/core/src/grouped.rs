//! Grouped data: contiguous bins with frequencies and optional per-bin means.
//!
//! Everything downstream consumes [`GroupedData`]. Construction validates the
//! bins (positive width, nonnegative frequency, mean inside its bin, no gaps or
//! overlaps) so estimators can rely on those invariants.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    /// Count, or relative frequency for pre-normalized histograms.
    pub freq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

impl Bin {
    pub fn new(lower: f64, upper: f64, freq: f64) -> Self {
        Bin {
            lower,
            upper,
            freq,
            mean: None,
        }
    }

    pub fn with_mean(lower: f64, upper: f64, freq: f64, mean: f64) -> Self {
        Bin {
            lower,
            upper,
            freq,
            mean: Some(mean),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    fn validate(&self, row: usize) -> Result<()> {
        let invalid = |message: String| Err(Error::InvalidBin { row, message });
        if !self.lower.is_finite() || !self.upper.is_finite() {
            return invalid(format!("bin edges must be finite (got [{}, {}))", self.lower, self.upper));
        }
        if self.lower >= self.upper {
            return invalid(format!("lower edge {} is not below upper edge {}", self.lower, self.upper));
        }
        if !self.freq.is_finite() || self.freq < 0.0 {
            return invalid(format!("negative or non-finite frequency {}", self.freq));
        }
        if let Some(mean) = self.mean {
            if !(self.lower..=self.upper).contains(&mean) {
                return invalid(format!(
                    "mean {mean} lies outside its bin [{}, {}]",
                    self.lower, self.upper
                ));
            }
        }
        Ok(())
    }
}

/// Ordered, contiguous bins. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupedDataRepr")]
pub struct GroupedData {
    bins: Vec<Bin>,
    n: f64,
}

#[derive(Deserialize)]
struct GroupedDataRepr {
    bins: Vec<Bin>,
    #[serde(default)]
    n: Option<f64>,
}

impl TryFrom<GroupedDataRepr> for GroupedData {
    type Error = Error;

    fn try_from(repr: GroupedDataRepr) -> Result<Self> {
        let gd = GroupedData::new(repr.bins)?;
        if let Some(n) = repr.n {
            if (n - gd.n).abs() > 1e-9 * gd.n.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "stated n = {n} does not equal the total frequency {}",
                    gd.n
                )));
            }
        }
        Ok(gd)
    }
}

impl GroupedData {
    /// Validates bins in the given order. Row numbers in errors are 1-based positions.
    pub fn new(bins: Vec<Bin>) -> Result<Self> {
        let rows: Vec<usize> = (1..=bins.len()).collect();
        Self::from_rows(bins, &rows)
    }

    fn from_rows(bins: Vec<Bin>, rows: &[usize]) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (bin, &row) in bins.iter().zip(rows) {
            bin.validate(row)?;
        }
        for (pair, &row) in bins.windows(2).zip(&rows[1..]) {
            if pair[0].upper != pair[1].lower {
                return Err(Error::NonContiguous {
                    row,
                    previous_upper: pair[0].upper,
                    lower: pair[1].lower,
                });
            }
        }
        let n: f64 = bins.iter().map(|b| b.freq).sum();
        if n <= 0.0 {
            return Err(Error::EmptySample);
        }
        Ok(GroupedData { bins, n })
    }

    /// Builds grouped data from edges and frequencies (`edges.len() == freqs.len() + 1`).
    pub fn from_edges(edges: &[f64], freqs: &[f64]) -> Result<Self> {
        if edges.len() != freqs.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} edges cannot bound {} bins",
                edges.len(),
                freqs.len()
            )));
        }
        let bins = edges
            .windows(2)
            .zip(freqs)
            .map(|(e, &f)| Bin::new(e[0], e[1], f))
            .collect();
        Self::new(bins)
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Total frequency.
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn has_means(&self) -> bool {
        self.bins.iter().all(|b| b.mean.is_some())
    }

    pub fn relative_frequencies(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.freq / self.n).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = self.bins.iter().map(|b| b.lower).collect();
        edges.push(self.bins[self.bins.len() - 1].upper);
        edges
    }

    /// Parses the CSV dialect `lower,upper,freq[,mean]` (header required, any column order).
    ///
    /// Rows are sorted by lower edge before the contiguity check; errors name
    /// the 1-based data row as it appeared in the file.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?;
        let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let missing = |name: &str| Error::Parse {
            row: 0,
            message: format!("header is missing the required column '{name}'"),
        };
        let lower_col = column("lower").ok_or_else(|| missing("lower"))?;
        let upper_col = column("upper").ok_or_else(|| missing("upper"))?;
        let freq_col = column("freq")
            .or_else(|| column("frequency"))
            .ok_or_else(|| missing("freq"))?;
        let mean_col = column("mean");

        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let field = |col: usize, name: &str| -> Result<f64> {
                let text = record.get(col).unwrap_or("");
                text.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("cannot parse '{text}' as a number in column '{name}'"),
                })
            };
            let mean = match mean_col.and_then(|c| record.get(c)) {
                None | Some("") => None,
                Some(_) => Some(field(mean_col.unwrap_or_default(), "mean")?),
            };
            let bin = Bin {
                lower: field(lower_col, "lower")?,
                upper: field(upper_col, "upper")?,
                freq: field(freq_col, "freq")?,
                mean,
            };
            rows.push((row, bin));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        rows.sort_by(|a, b| a.1.lower.total_cmp(&b.1.lower));
        let (row_numbers, bins): (Vec<usize>, Vec<Bin>) = rows.into_iter().unzip();
        Self::from_rows(bins, &row_numbers)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv(text.as_bytes())
    }

    /// Writes the CSV dialect read by [`GroupedData::from_csv`]; the mean
    /// column is emitted when any bin carries a mean.
    pub fn to_csv(&self) -> String {
        let with_means = self.bins.iter().any(|b| b.mean.is_some());
        let mut out = String::from(if with_means {
            "lower,upper,freq,mean\n"
        } else {
            "lower,upper,freq\n"
        });
        for b in &self.bins {
            out.push_str(&format!("{},{},{}", b.lower, b.upper, b.freq));
            if with_means {
                out.push(',');
                if let Some(m) = b.mean {
                    out.push_str(&m.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Folds every zero-frequency bin into its right neighbour (left neighbour
    /// for trailing zero bins). Means of the absorbing bin are unchanged since
    /// an empty bin carries no weight.
    pub fn merge_zero_bins(&self) -> Result<GroupedData> {
        let mut merged: Vec<Bin> = Vec::with_capacity(self.bins.len());
        let mut pending_lower: Option<f64> = None;
        for bin in &self.bins {
            if bin.freq == 0.0 {
                pending_lower.get_or_insert(bin.lower);
                continue;
            }
            let mut bin = *bin;
            if let Some(lower) = pending_lower.take() {
                bin.lower = lower;
            }
            merged.push(bin);
        }
        let last = merged.last_mut().ok_or(Error::EmptySample)?;
        if pending_lower.is_some() {
            last.upper = self.bins[self.bins.len() - 1].upper;
        }
        GroupedData::new(merged)
    }

    pub fn is_merged(&self) -> bool {
        self.bins.iter().all(|b| b.freq > 0.0)
    }

    pub fn cumulative(&self) -> CumulativeTable {
        CumulativeTable::new(self)
    }

    pub fn locate_bin(&self, p: f64) -> Result<usize> {
        self.cumulative().locate_bin(p)
    }
}

/// Cumulative relative frequencies at each bin edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTable {
    pub edges: Vec<f64>,
    pub cum_prob: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(gd: &GroupedData) -> Self {
        let mut cum_prob = Vec::with_capacity(gd.len() + 1);
        cum_prob.push(0.0);
        let mut running = 0.0;
        for b in gd.bins() {
            running += b.freq;
            cum_prob.push(running / gd.n());
        }
        // Exact by definition; guards against rounding in the running sum.
        *cum_prob.last_mut().expect("nonempty") = 1.0;
        CumulativeTable {
            edges: gd.edges(),
            cum_prob,
        }
    }

    /// Index of the bin holding the `p` quantile: the smallest `j` with
    /// `cum_prob[j + 1] >= p`. A `p` sitting exactly on a boundary resolves
    /// to the lower bin.
    pub fn locate_bin(&self, p: f64) -> Result<usize> {
        check_probability(p)?;
        let j = self.cum_prob[1..].partition_point(|&c| c < p);
        Ok(j.min(self.cum_prob.len() - 2))
    }
}
