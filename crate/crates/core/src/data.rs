//! Daily panel ingestion, validation and derived inputs.
//!
//! A [`PanelSeries`] holds aligned daily observations of realized volatility,
//! index returns (only their sign is used), the policy implementation proxy and
//! the announcement flag. Rows with missing or non-positive volatility are
//! dropped with a warning at load time; structural violations (unordered
//! dates, out-of-range covariates) are hard errors.

use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aligned daily series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSeries {
    dates: Vec<NaiveDate>,
    rv: Vec<f64>,
    ret: Vec<f64>,
    x: Vec<f64>,
    delta: Vec<u8>,
}

impl PanelSeries {
    pub fn new(
        dates: Vec<NaiveDate>,
        rv: Vec<f64>,
        ret: Vec<f64>,
        x: Vec<f64>,
        delta: Vec<u8>,
    ) -> Result<Self> {
        let n = dates.len();
        if rv.len() != n || ret.len() != n || x.len() != n || delta.len() != n {
            return Err(Error::data("series lengths differ"));
        }
        if n < 2 {
            return Err(Error::data(format!("panel needs at least 2 rows, got {n}")));
        }
        for t in 1..n {
            if dates[t] <= dates[t - 1] {
                return Err(Error::data(format!(
                    "dates not strictly increasing at {} (previous {})",
                    dates[t],
                    dates[t - 1]
                )));
            }
        }
        for t in 0..n {
            if !(rv[t] > 0.0 && rv[t].is_finite()) {
                return Err(Error::data(format!("rv must be positive, got {} on {}", rv[t], dates[t])));
            }
            if !ret[t].is_finite() {
                return Err(Error::data(format!("non-finite return on {}", dates[t])));
            }
            if !(0.0..=1.0).contains(&x[t]) {
                return Err(Error::data(format!("x must lie in [0, 1], got {} on {}", x[t], dates[t])));
            }
            if delta[t] > 1 {
                return Err(Error::data(format!("delta must be 0 or 1, got {} on {}", delta[t], dates[t])));
            }
        }
        Ok(Self { dates, rv, ret, x, delta })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn rv(&self) -> &[f64] {
        &self.rv
    }

    pub fn ret(&self) -> &[f64] {
        &self.ret
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn delta(&self) -> &[u8] {
        &self.delta
    }

    /// Sub-panel over `range`; fails if fewer than two rows remain.
    pub fn slice(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.len() || range.start >= range.end {
            return Err(Error::arg(format!("slice {range:?} out of bounds for panel of length {}", self.len())));
        }
        Self::new(
            self.dates[range.clone()].to_vec(),
            self.rv[range.clone()].to_vec(),
            self.ret[range.clone()].to_vec(),
            self.x[range.clone()].to_vec(),
            self.delta[range].to_vec(),
        )
    }

    /// Number of leading rows dated on or before `date`.
    pub fn count_through(&self, date: NaiveDate) -> usize {
        self.dates.partition_point(|d| *d <= date)
    }

    /// Index range of rows with `from <= date <= to`.
    pub fn date_range(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Range<usize> {
        let start = from.map_or(0, |d| self.dates.partition_point(|x| *x < d));
        let end = to.map_or(self.len(), |d| self.count_through(d));
        start..end.max(start)
    }

    pub fn sign_dummy(&self) -> SignDummy {
        SignDummy::from_returns(&self.ret)
    }
}

/// Negative-return indicator: 1 when the return is strictly negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignDummy(Vec<u8>);

impl SignDummy {
    pub fn from_returns(ret: &[f64]) -> Self {
        SignDummy(ret.iter().map(|&r| u8::from(r < 0.0)).collect())
    }

    pub fn values(&self) -> &[u8] {
        &self.0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&d| f64::from(d)).collect()
    }
}

/// Covariates centered on their means over an estimation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteredCovariates {
    pub x_bar: f64,
    pub delta_bar: f64,
    pub xc: Vec<f64>,
    pub dc: Vec<f64>,
}

/// Means are taken over `window` only; the centered series span the full panel.
pub fn center_covariates(p: &PanelSeries, window: Range<usize>) -> Result<CenteredCovariates> {
    if window.start >= window.end || window.end > p.len() {
        return Err(Error::arg(format!("centering window {window:?} is empty or out of bounds")));
    }
    let n = (window.end - window.start) as f64;
    let x_bar = p.x[window.clone()].iter().sum::<f64>() / n;
    let delta_bar = p.delta[window].iter().map(|&d| f64::from(d)).sum::<f64>() / n;
    Ok(CenteredCovariates {
        x_bar,
        delta_bar,
        xc: p.x.iter().map(|v| v - x_bar).collect(),
        dc: p.delta.iter().map(|&d| f64::from(d) - delta_bar).collect(),
    })
}

/// Logical column names in the input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub date: String,
    pub rv: String,
    pub ret: String,
    pub x: String,
    pub delta: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            date: "date".into(),
            rv: "rv".into(),
            ret: "ret".into(),
            x: "x".into(),
            delta: "delta".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub columns: ColumnMap,
    pub delimiter: u8,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { columns: ColumnMap::default(), delimiter: b',' }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRow {
    /// 1-based line number in the file, header included.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedPanel {
    pub panel: PanelSeries,
    pub dropped: Vec<DroppedRow>,
}

pub fn load_panel(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LoadedPanel> {
    let file = std::fs::File::open(path.as_ref())?;
    read_panel(file, opts)
}

fn is_missing(s: &str) -> bool {
    let s = s.trim();
    s.is_empty() || ["na", "nan", "null", "n/a", "."].contains(&s.to_ascii_lowercase().as_str())
}

pub fn read_panel<R: Read>(reader: R, opts: &LoadOptions) -> Result<LoadedPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let c = &opts.columns;
    let find = |name: &str, field: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(format!("missing column `{name}` (field {field})")))
    };
    let idx = [
        find(&c.date, "date")?,
        find(&c.rv, "rv")?,
        find(&c.ret, "ret")?,
        find(&c.x, "x")?,
        find(&c.delta, "delta")?,
    ];

    let (mut dates, mut rv, mut ret, mut x, mut delta) = (vec![], vec![], vec![], vec![], vec![]);
    let mut dropped = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let fields: Vec<&str> = idx.iter().map(|&j| rec.get(j).unwrap_or("")).collect();
        if let Some(k) = fields.iter().position(|f| is_missing(f)) {
            let name = ["date", "rv", "ret", "x", "delta"][k];
            log::warn!("line {line}: missing {name}, row dropped");
            dropped.push(DroppedRow { line, reason: format!("missing {name}") });
            continue;
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d")
            .map_err(|e| Error::data(format!("line {line}: bad date `{}`: {e}", fields[0])))?;
        let num = |k: usize, name: &str| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|_| Error::data(format!("line {line}: bad {name} `{}`", fields[k])))
        };
        let v_rv = num(1, "rv")?;
        let v_ret = num(2, "ret")?;
        let v_x = num(3, "x")?;
        let v_delta = num(4, "delta")?;
        if !(v_rv > 0.0 && v_rv.is_finite()) {
            log::warn!("line {line}: non-positive rv {v_rv}, row dropped");
            dropped.push(DroppedRow { line, reason: format!("non-positive rv {v_rv}") });
            continue;
        }
        let d = if v_delta == 0.0 {
            0
        } else if v_delta == 1.0 {
            1
        } else {
            return Err(Error::data(format!("line {line}: delta must be 0 or 1, got {v_delta}")));
        };
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(Error::data(format!("line {line}: date {date} not after {prev}")));
            }
        }
        dates.push(date);
        rv.push(v_rv);
        ret.push(v_ret);
        x.push(v_x);
        delta.push(d);
    }
    if !dropped.is_empty() {
        log::warn!("{} row(s) dropped during ingestion", dropped.len());
    }
    let panel = PanelSeries::new(dates, rv, ret, x, delta)?;
    Ok(LoadedPanel { panel, dropped })
}

/// Writes the panel with the default column names. Reals use the shortest
/// representation that parses back to the identical value.
pub fn write_panel<W: Write>(p: &PanelSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "rv", "ret", "x", "delta"])?;
    for t in 0..p.len() {
        w.write_record([
            p.dates[t].format("%Y-%m-%d").to_string(),
            p.rv[t].to_string(),
            p.ret[t].to_string(),
            p.x[t].to_string(),
            p.delta[t].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnouncementWindow {
    pub index: usize,
    pub date: NaiveDate,
    pub rv: f64,
    /// Terms averaged on each side (below `window` near the sample edges).
    pub terms: usize,
    pub mean_before: f64,
    pub mean_after: f64,
    pub before_pct: f64,
    pub after_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnouncementStats {
    pub window: usize,
    pub events: Vec<AnnouncementWindow>,
    /// Announcements at the very first or last row, which have no neighbours.
    pub skipped: usize,
    pub mean_before_pct: f64,
    pub mean_after_pct: f64,
}

/// Average volatility over the `window` days before and after each
/// announcement, as a percentage variation relative to the announcement-day
/// volatility. Near the sample edges both sides shrink to the same number of
/// available terms.
pub fn announcement_window_stats(p: &PanelSeries, window: usize) -> Result<AnnouncementStats> {
    if window == 0 {
        return Err(Error::arg("window must be at least 1"));
    }
    let n = p.len();
    let mut events = Vec::new();
    let mut skipped = 0;
    for t in (0..n).filter(|&t| p.delta[t] == 1) {
        let k = window.min(t).min(n - 1 - t);
        if k == 0 {
            skipped += 1;
            continue;
        }
        let mean_before = p.rv[t - k..t].iter().sum::<f64>() / k as f64;
        let mean_after = p.rv[t + 1..=t + k].iter().sum::<f64>() / k as f64;
        let base = p.rv[t];
        events.push(AnnouncementWindow {
            index: t,
            date: p.dates[t],
            rv: base,
            terms: k,
            mean_before,
            mean_after,
            before_pct: 100.0 * (mean_before - base) / base,
            after_pct: 100.0 * (mean_after - base) / base,
        });
    }
    if events.is_empty() {
        return Err(Error::data("no usable announcement days in sample"));
    }
    let m = events.len() as f64;
    let mean_before_pct = events.iter().map(|e| e.before_pct).sum::<f64>() / m;
    let mean_after_pct = events.iter().map(|e| e.after_pct).sum::<f64>() / m;
    Ok(AnnouncementStats { window, events, skipped, mean_before_pct, mean_after_pct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(day as u64)
    }

    fn panel(rv: Vec<f64>, delta: Vec<u8>) -> PanelSeries {
        let n = rv.len();
        PanelSeries::new((0..n as u32).map(d).collect(), rv, vec![0.1; n], vec![0.3; n], delta).unwrap()
    }

    #[test]
    fn loads_three_rows() {
        let csv = "date,rv,ret,x,delta\n2020-01-02,10.5,-0.3,0.1,0\n2020-01-03,11,0.2,0.11,1\n2020-01-06,9.5,0,0.12,0\n";
        let lp = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(lp.panel.len(), 3);
        assert!(lp.dropped.is_empty());
        assert_eq!(lp.panel.sign_dummy().values(), &[1, 0, 0]);
    }

    #[test]
    fn drops_negative_rv_and_missing() {
        let csv = "date,rv,ret,x,delta\n2020-01-02,10,0.1,0.1,0\n2020-01-03,-1,0.2,0.1,0\n2020-01-06,9,,0.1,0\n2020-01-07,9,0.1,0.1,1\n";
        let lp = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(lp.panel.len(), 2);
        assert_eq!(lp.dropped.len(), 2);
        assert_eq!(lp.dropped[0].line, 3);
        assert!(lp.dropped[0].reason.contains("rv"));
        assert!(lp.dropped[1].reason.contains("ret"));
    }

    #[test]
    fn duplicate_date_is_error() {
        let csv = "date,rv,ret,x,delta\n2020-01-02,10,0.1,0.1,0\n2020-01-02,11,0.2,0.1,0\n";
        assert!(matches!(read_panel(csv.as_bytes(), &LoadOptions::default()), Err(Error::Data(_))));
    }

    #[test]
    fn non_binary_delta_is_error() {
        let csv = "date,rv,ret,x,delta\n2020-01-02,10,0.1,0.1,0\n2020-01-03,11,0.2,0.1,2\n";
        let err = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("delta"));
    }

    #[test]
    fn missing_column_names_field() {
        let csv = "date,vol,ret,x,delta\n2020-01-02,10,0.1,0.1,0\n";
        let err = read_panel(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("`rv`"), "{err}");
    }

    #[test]
    fn custom_columns_and_delimiter() {
        let csv = "day;RK;r;proxy;ann\n2020-01-02;10;0.1;0.1;0\n2020-01-03;11;-0.2;0.1;1\n";
        let opts = LoadOptions {
            columns: ColumnMap {
                date: "day".into(),
                rv: "RK".into(),
                ret: "r".into(),
                x: "proxy".into(),
                delta: "ann".into(),
            },
            delimiter: b';',
        };
        let lp = read_panel(csv.as_bytes(), &opts).unwrap();
        assert_eq!(lp.panel.rv(), &[10.0, 11.0]);
    }

    #[test]
    fn zero_return_is_not_negative() {
        assert_eq!(SignDummy::from_returns(&[0.0, -0.0, -1e-12, 1.0]).values(), &[0, 0, 1, 0]);
    }

    #[test]
    fn centering_constant_x() {
        let p = panel(vec![1.0; 4], vec![0, 1, 0, 1]);
        let c = center_covariates(&p, 0..4).unwrap();
        assert!(c.xc.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(c.delta_bar, 0.5);
        assert_eq!(c.dc, vec![-0.5, 0.5, -0.5, 0.5]);
    }

    #[test]
    fn centering_on_first_half() {
        let n = 10;
        let x: Vec<f64> = (0..n).map(|i| 0.05 * i as f64).collect();
        let p = PanelSeries::new((0..n as u32).map(d).collect(), vec![1.0; n], vec![0.0; n], x, vec![0; n]).unwrap();
        let c = center_covariates(&p, 0..5).unwrap();
        let win: f64 = c.xc[..5].iter().sum();
        let all: f64 = c.xc.iter().sum();
        assert!(win.abs() < 1e-12);
        assert!(all > 0.1);
        assert!(center_covariates(&p, 3..3).is_err());
    }

    #[test]
    fn window_stats_constant_series() {
        let mut delta = vec![0; 30];
        delta[10] = 1;
        delta[20] = 1;
        let s = announcement_window_stats(&panel(vec![7.0; 30], delta), 5).unwrap();
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.mean_before_pct, 0.0);
        assert_eq!(s.mean_after_pct, 0.0);
    }

    #[test]
    fn window_stats_single_peak() {
        // announcement at t=6 (1-based) with RV 10, neighbours 9
        let mut rv = vec![9.0; 12];
        rv[5] = 10.0;
        let mut delta = vec![0; 12];
        delta[5] = 1;
        let s = announcement_window_stats(&panel(rv, delta), 5).unwrap();
        assert_eq!(s.events[0].terms, 5);
        assert!((s.mean_before_pct + 10.0).abs() < 1e-12);
        assert!((s.mean_after_pct + 10.0).abs() < 1e-12);
    }

    #[test]
    fn window_stats_truncates_symmetrically() {
        // announcement at t=4 (1-based) only has 3 terms before
        let mut rv = vec![1.0, 2.0, 3.0, 10.0, 5.0, 6.0, 7.0, 100.0, 100.0, 100.0];
        rv[3] = 10.0;
        let mut delta = vec![0; 10];
        delta[3] = 1;
        let s = announcement_window_stats(&panel(rv, delta), 5).unwrap();
        let e = &s.events[0];
        assert_eq!(e.terms, 3);
        assert_eq!(e.mean_before, 2.0);
        assert_eq!(e.mean_after, 6.0);
    }

    #[test]
    fn window_stats_requires_announcements() {
        assert!(announcement_window_stats(&panel(vec![1.0; 5], vec![0; 5]), 2).is_err());
        assert!(announcement_window_stats(&panel(vec![1.0; 5], vec![0, 1, 0, 0, 0]), 0).is_err());
    }

    proptest! {
        #[test]
        fn centered_mean_is_zero(xs in proptest::collection::vec(0.0f64..1.0, 4..200), split in 0.2f64..1.0) {
            let n = xs.len();
            let end = ((n as f64 * split) as usize).max(1);
            let delta: Vec<u8> = (0..n).map(|i| (i % 7 == 0) as u8).collect();
            let p = PanelSeries::new((0..n as u32).map(d).collect(), vec![1.0; n], vec![0.0; n], xs, delta).unwrap();
            let c = center_covariates(&p, 0..end).unwrap();
            let mx: f64 = c.xc[..end].iter().sum::<f64>() / end as f64;
            let md: f64 = c.dc[..end].iter().sum::<f64>() / end as f64;
            prop_assert!(mx.abs() < 1e-12);
            prop_assert!(md.abs() < 1e-12);
        }

        #[test]
        fn local_peaks_give_negative_variations(base in proptest::collection::vec(1.0f64..20.0, 30..120), bump in 0.1f64..5.0) {
            let n = base.len();
            let mut rv = base.clone();
            let mut delta = vec![0u8; n];
            for t in (3..n - 3).step_by(9) {
                let peak = rv[t.saturating_sub(5)..(t + 6).min(n)].iter().cloned().fold(0.0, f64::max) + bump;
                rv[t] = peak;
                delta[t] = 1;
            }
            let s = announcement_window_stats(&panel(rv, delta), 5).unwrap();
            for e in &s.events {
                prop_assert!(e.before_pct < 0.0 && e.after_pct < 0.0);
            }
            prop_assert!(s.mean_before_pct < 0.0 && s.mean_after_pct < 0.0);
        }

        #[test]
        fn write_then_read_is_lossless(rv in proptest::collection::vec(1e-6f64..500.0, 2..50)) {
            let n = rv.len();
            let ret: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let x: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64) / 3.0).collect();
            let delta: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
            let p = PanelSeries::new((0..n as u32).map(d).collect(), rv, ret, x, delta).unwrap();
            let mut buf = Vec::new();
            write_panel(&p, &mut buf).unwrap();
            let back = read_panel(buf.as_slice(), &LoadOptions::default()).unwrap();
            prop_assert_eq!(&back.panel, &p);
            let mut buf2 = Vec::new();
            write_panel(&back.panel, &mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
