//! CSV emission and a generic plotting script.
//!
//! Numbers use `{:.16e}` (17 significant digits), `.` as decimal separator
//! and `\n` line endings, so reruns are byte-identical.

use std::fmt::Write;

use crate::scalar::to_db;
use crate::spectra::SpectrumPoint;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `freq_hz,V1_dB,V2_dB[,label]`. All series share one file; the label
/// column is written only when a label is present.
pub fn spectrum_csv(series: &[(Option<String>, Vec<SpectrumPoint<f64>>)]) -> String {
    let labelled = series.iter().any(|(l, _)| l.is_some());
    let mut s = String::from(if labelled { "freq_hz,V1_dB,V2_dB,label\n" } else { "freq_hz,V1_dB,V2_dB\n" });
    for (label, pts) in series {
        for p in pts {
            let _ = write!(s, "{},{},{}", fmt_num(p.freq_hz()), fmt_num(to_db(p.v1)), fmt_num(to_db(p.v2)));
            if labelled {
                let _ = write!(s, ",{}", label.as_deref().unwrap_or(""));
            }
            s.push('\n');
        }
    }
    s
}

/// One GW noise curve sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GwRow {
    pub freq_hz: f64,
    /// S / h²_SQL, linear.
    pub s_over_hsql2: f64,
    pub scheme: String,
}

/// `freq_hz,S_over_hsql2_dB,scheme`.
pub fn gw_csv(rows: &[GwRow]) -> String {
    let mut s = String::from("freq_hz,S_over_hsql2_dB,scheme\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", fmt_num(r.freq_hz), fmt_num(to_db(r.s_over_hsql2)), r.scheme);
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub freq_hz: f64,
    pub v1: f64,
    pub v2: f64,
}

/// `<axis>,V1_dB,V2_dB,freq_hz`, e.g. `pump_watts,V1_dB,V2_dB,freq_hz`.
pub fn sweep_csv(axis: &str, rows: &[SweepRow]) -> String {
    let mut s = format!("{axis},V1_dB,V2_dB,freq_hz\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_num(r.x),
            fmt_num(to_db(r.v1)),
            fmt_num(to_db(r.v2)),
            fmt_num(r.freq_hz)
        );
    }
    s
}

/// Reads back `freq_hz,V1_dB,V2_dB[,label]` rows as linear variances.
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<(f64, f64, f64, Option<String>)>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if !header.starts_with("freq_hz,V1_dB,V2_dB") {
        return Err(format!("unexpected header {header:?}"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut it = line.split(',');
            let mut num = || -> Result<f64, String> {
                it.next()
                    .ok_or(format!("line {}: too few fields", i + 2))?
                    .parse::<f64>()
                    .map_err(|e| format!("line {}: {e}", i + 2))
            };
            let f = num()?;
            let v1 = 10f64.powf(num()? / 10.0);
            let v2 = 10f64.powf(num()? / 10.0);
            Ok((f, v1, v2, it.next().map(str::to_string)))
        })
        .collect()
}

/// A small matplotlib script that plots every numeric column of `csv_name`
/// against the first, one line per label when a label column exists.
pub fn plot_script(csv_name: &str, title: &str, logx: bool) -> String {
    format!(
        r#"import csv, collections
import matplotlib.pyplot as plt

rows = list(csv.reader(open({csv_name:?})))
head, rows = rows[0], rows[1:]
label_col = head.index("label") if "label" in head else head.index("scheme") if "scheme" in head else None
groups = collections.OrderedDict()
for r in rows:
    groups.setdefault(r[label_col] if label_col is not None else "", []).append(r)
fig, ax = plt.subplots()
for name, rs in groups.items():
    x = [float(r[0]) for r in rs]
    for j, h in enumerate(head[1:], start=1):
        if j == label_col or h == "freq_hz":
            continue
        ax.plot(x, [float(r[j]) for r in rs], label=(name + " " + h).strip())
{logx}ax.set_xlabel(head[0])
ax.set_title({title:?})
ax.legend()
fig.savefig({png:?}, dpi=150)
"#,
        logx = if logx { "ax.set_xscale(\"log\")\n" } else { "" },
        png = format!("{}.png", csv_name.trim_end_matches(".csv")),
    )
}
