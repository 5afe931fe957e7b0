use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use super::config::InitKind;
use super::run::RunRecord;
use crate::error::{Error, Result};

pub const RESULTS_FILE: &str = "ratio_sweep.csv";
pub const PLOT_FILE: &str = "ratio_sweep.svg";

pub const RUN_RECORD_HEADER: [&str; 13] = [
    "N",
    "beta",
    "betaN",
    "init",
    "r",
    "spread",
    "S1_mean",
    "S2_mean",
    "S3_mean",
    "energy_drift",
    "seed",
    "valid",
    "note",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Opens `path` for writing, refusing to replace an existing file unless `force`.
pub fn create_output(path: &Path, force: bool) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut options = fs::OpenOptions::new();
    options.write(true);
    if force {
        options.create(true).truncate(true);
    } else {
        options.create_new(true);
    }
    options.open(path).map_err(|e| {
        if e.kind() == io::ErrorKind::AlreadyExists {
            Error::io(
                path,
                io::Error::new(e.kind(), "file exists; pass --force to overwrite"),
            )
        } else {
            Error::io(path, e)
        }
    })
}

/// Writes a header and rows of preformatted fields.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

fn record_fields(r: &RunRecord) -> Vec<String> {
    vec![
        r.n.to_string(),
        fmt_f64(r.beta),
        fmt_f64(r.beta_n),
        r.init.to_string(),
        fmt_f64(r.r),
        fmt_f64(r.spread),
        fmt_f64(r.s1_mean),
        fmt_f64(r.s2_mean),
        fmt_f64(r.s3_mean),
        fmt_f64(r.energy_drift),
        r.seed.to_string(),
        r.valid.to_string(),
        r.note.clone(),
    ]
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> io::Result<()> {
    write_table(out, &RUN_RECORD_HEADER, records.iter().map(record_fields))
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Parses the output of [`write_records`].
pub fn read_records<R: Read>(input: R) -> std::result::Result<Vec<RunRecord>, String> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(RUN_RECORD_HEADER.iter().copied()) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let ctx = |field: &str, e: &dyn std::fmt::Display| format!("row {}: {field}: {e}", line + 1);
        let float = |i: usize| row[i].parse::<f64>().map_err(|e| ctx(RUN_RECORD_HEADER[i], &e));
        records.push(RunRecord {
            n: row[0].parse().map_err(|e| ctx("N", &e))?,
            beta: float(1)?,
            beta_n: float(2)?,
            init: row[3].parse::<InitKind>().map_err(|e| ctx("init", &e))?,
            r: float(4)?,
            spread: float(5)?,
            s1_mean: float(6)?,
            s2_mean: float(7)?,
            s3_mean: float(8)?,
            energy_drift: float(9)?,
            seed: row[10].parse().map_err(|e| ctx("seed", &e))?,
            valid: row[11].parse().map_err(|e| ctx("valid", &e))?,
            note: row[12].to_string(),
        });
    }
    Ok(records)
}

pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Scatter of `r` against `βN` (log axis), one series per chain size.
///
/// Thermal runs are drawn as circles, out-of-equilibrium runs as squares;
/// invalid or non-finite records are skipped.
pub fn render_svg(records: &[RunRecord]) -> String {
    let (width, height) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 60.0);
    let (pw, ph) = (width - left - right, height - top - bottom);

    let points: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.valid && r.r.is_finite() && r.beta_n > 0.0)
        .collect();
    let mut series: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in &points {
        series.entry(r.n).or_default().push(r);
    }
    for r in records {
        series.entry(r.n).or_default();
    }

    let (mut xlo, mut xhi) = points
        .iter()
        .map(|r| r.beta_n.log10())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !xlo.is_finite() {
        (xlo, xhi) = (-2.0, 0.0);
    }
    xlo = xlo.floor();
    xhi = xhi.ceil().max(xlo + 1.0);
    let ymax = points
        .iter()
        .map(|r| r.r + r.spread.max(0.0))
        .fold(0.0f64, f64::max);
    let ymax = if ymax > 0.0 { ymax * 1.1 } else { 1.0 };
    let sx = |b: f64| left + (b.log10() - xlo) / (xhi - xlo) * pw;
    let sy = |r: f64| top + ph - r / ymax * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for decade in (xlo as i32)..=(xhi as i32) {
        let x = sx(10f64.powi(decade));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0
        );
    }
    for i in 0..=5 {
        let v = ymax * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">βN</text>"#,
        left + pw / 2.0,
        height - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">r</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    for (i, (n, recs)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series" data-n="{n}" fill="{color}" stroke="{color}">"#);
        for r in recs {
            let (x, y) = (sx(r.beta_n), sy(r.r));
            if r.spread > 0.0 {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                    sy(r.r + r.spread),
                    sy((r.r - r.spread).max(0.0))
                );
            }
            match r.init {
                InitKind::Thermal => {
                    let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4"/>"#);
                }
                InitKind::OutOfEquilibrium => {
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="none"/>"#,
                        x - 4.0,
                        y - 4.0
                    );
                }
            }
        }
        let ly = top + 10.0 + 20.0 * i as f64;
        let lx = left + pw + 20.0;
        let _ = writeln!(
            svg,
            r#"<circle cx="{lx:.2}" cy="{ly:.2}" r="4"/><text x="{:.2}" y="{:.2}" stroke="none">N = {n}</text>"#,
            lx + 10.0,
            ly + 4.0
        );
        let _ = writeln!(svg, "</g>");
    }
    let ly = top + 10.0 + 20.0 * series.len() as f64 + 10.0;
    let lx = left + pw + 20.0;
    let _ = writeln!(
        svg,
        r#"<text x="{lx:.2}" y="{ly:.2}">● thermal</text><text x="{lx:.2}" y="{:.2}">□ out-of-equilibrium</text>"#,
        ly + 16.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    pub svg: bool,
    pub force: bool,
}

/// Writes the results CSV (and optionally the SVG plot) into `dir`.
pub fn emit_outputs(records: &[RunRecord], dir: &Path, options: EmitOptions) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let csv_path = dir.join(RESULTS_FILE);
    let file = create_output(&csv_path, options.force)?;
    write_records(io::BufWriter::new(file), records).map_err(|e| Error::io(&csv_path, e))?;
    written.push(csv_path);
    if options.svg {
        let svg_path = dir.join(PLOT_FILE);
        let mut file = create_output(&svg_path, options.force)?;
        file.write_all(render_svg(records).as_bytes())
            .map_err(|e| Error::io(&svg_path, e))?;
        written.push(svg_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(n: usize, beta_n: f64, init: InitKind, r: f64) -> RunRecord {
        RunRecord {
            n,
            beta: beta_n / n as f64,
            beta_n,
            init,
            r,
            spread: 0.01,
            s1_mean: 0.1,
            s2_mean: -3.0,
            s3_mean: 1.0 / 3.0,
            energy_drift: 2e-9,
            seed: u64::MAX,
            valid: true,
            note: String::new(),
        }
    }

    #[test]
    fn empty_list_gives_header_only() {
        assert_eq!(
            records_to_csv(&[]),
            "N,beta,betaN,init,r,spread,S1_mean,S2_mean,S3_mean,energy_drift,seed,valid,note\n"
        );
    }

    #[test]
    fn invalid_records_round_trip() {
        let mut bad = record(200, 0.1, InitKind::OutOfEquilibrium, f64::NAN);
        bad.valid = false;
        bad.note = "ensemble 2: integration blew up, at t = 3".into();
        let back = read_records(records_to_csv(&[bad.clone()]).as_bytes()).unwrap();
        assert!(back[0].r.is_nan());
        assert_eq!(back[0].note, bad.note);
        assert!(!back[0].valid);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn one_svg_series_per_size() {
        let recs = vec![
            record(200, 1.0, InitKind::Thermal, 0.8),
            record(200, 0.1, InitKind::OutOfEquilibrium, 0.1),
            record(500, 1.0, InitKind::Thermal, 0.75),
            record(800, 0.01, InitKind::Thermal, 0.01),
        ];
        let svg = render_svg(&recs);
        assert_eq!(svg.matches(r#"class="series""#).count(), 3);
        for n in [200, 500, 800] {
            assert!(svg.contains(&format!(r#"data-n="{n}""#)));
        }
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn force_controls_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![record(200, 1.0, InitKind::Thermal, 0.8)];
        let opts = EmitOptions { svg: true, force: false };
        let paths = emit_outputs(&recs, dir.path(), opts).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(emit_outputs(&recs, dir.path(), opts).is_err());
        let first = fs::read(&paths[0]).unwrap();
        emit_outputs(&recs, dir.path(), EmitOptions { svg: true, force: true }).unwrap();
        assert_eq!(fs::read(&paths[0]).unwrap(), first);
        assert_eq!(load_records(&paths[0]).unwrap(), recs);
    }

    proptest! {
        #[test]
        fn csv_round_trips_exactly(
            rows in prop::collection::vec(
                (4usize..5000, 1e-6f64..10.0, any::<bool>(), -1e6f64..1e6, 0.0f64..1e3, any::<u64>()),
                0..8,
            )
        ) {
            let records: Vec<RunRecord> = rows
                .into_iter()
                .map(|(n, beta_n, thermal, s, r, seed)| {
                    let init = if thermal { InitKind::Thermal } else { InitKind::OutOfEquilibrium };
                    let mut rec = record(n, beta_n, init, r);
                    rec.s1_mean = s;
                    rec.s2_mean = s / 3.0;
                    rec.s3_mean = -s * 1e-300;
                    rec.seed = seed;
                    rec
                })
                .collect();
            let back = read_records(records_to_csv(&records).as_bytes()).unwrap();
            prop_assert_eq!(back, records);
        }
    }
}
