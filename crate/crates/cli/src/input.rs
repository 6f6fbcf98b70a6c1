use std::fmt::Write as _;
use std::path::Path;

use gfic_panel::{load_panel, read_panel, ColumnSchema, PanelDataset};

use crate::{CliError, RunConfig};

/// Columns of the raw state-level cigarette file.
const RAW_CIGARETTE: [&str; 8] = [
    "state", "year", "price", "pop", "pop16", "cpi", "ndi", "sales",
];

/// Turn the raw cigarette file into `y = ln(packs per person aged 16+)`,
/// `x = ln(real price)` with controls `ln(real income)` and
/// `ln(real minimum neighbouring price)`. Two-digit years are read as 19xx.
fn cigarette_panel(path: &Path) -> Result<PanelDataset, CliError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Data(format!("cigarette file lacks column `{name}`")))
    };
    let idx: Vec<usize> = RAW_CIGARETTE
        .iter()
        .map(|c| col(c))
        .collect::<Result<_, _>>()?;
    let pimin = col("pimin")?;
    let mut text = String::from("id,time,y,x,ln_income,ln_min_price\n");
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "non-numeric value in cigarette file at data row {}",
                        row + 1
                    ))
                })
        };
        let [state, year, price, pop, pop16, cpi, ndi, sales] =
            [0, 1, 2, 3, 4, 5, 6, 7].map(|k| num(idx[k]));
        let (year, cpi) = (year? as i64, cpi?);
        let year = if year < 100 { 1900 + year } else { year };
        writeln!(
            text,
            "{},{},{},{},{},{}",
            state? as i64,
            year,
            (sales? * pop? / pop16?).ln(),
            (price? / cpi).ln(),
            (ndi? / cpi).ln(),
            (num(pimin)? / cpi).ln()
        )
        .expect("writing to a string");
    }
    Ok(read_panel(text.as_bytes(), &ColumnSchema::default())?)
}

fn is_raw_cigarette(path: &Path) -> Result<bool, CliError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let h = rdr.headers()?;
    Ok(RAW_CIGARETTE
        .iter()
        .all(|c| h.iter().any(|x| x.trim() == *c)))
}

/// Load the panel named by `--data`, converting the raw cigarette file when
/// that is what it is, and cut it to `--window`.
pub fn load(cfg: &RunConfig) -> Result<PanelDataset, CliError> {
    let path = cfg
        .data
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("`{}` needs --data <panel.csv>", cfg.command)))?;
    let p = if is_raw_cigarette(path)? {
        cigarette_panel(path)?
    } else {
        load_panel(path, &cfg.schema)?
    };
    match cfg.window {
        Some((a, b)) => Ok(p.window(a, b)?),
        None => Ok(p),
    }
}
