use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::{Control, PanelDataset, PanelError};

/// Which CSV columns hold the id, time, outcome and regressor. `controls =
/// None` takes every remaining column as a control.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSchema {
    pub id: String,
    pub time: String,
    pub y: String,
    pub x: String,
    pub controls: Option<Vec<String>>,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            id: "id".into(),
            time: "time".into(),
            y: "y".into(),
            x: "x".into(),
            controls: None,
        }
    }
}

pub fn load_panel(
    path: impl AsRef<Path>,
    schema: &ColumnSchema,
) -> Result<PanelDataset, PanelError> {
    let f = std::fs::File::open(path)?;
    read_panel(f, schema)
}

fn parse_f64(s: &str, row: usize, column: &str) -> Result<f64, PanelError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| PanelError::NonNumericValue {
            row,
            column: column.to_string(),
            value: s.to_string(),
        })
}

/// Ids sort numerically when all of them are integers, lexicographically
/// otherwise.
fn sort_ids(ids: &mut [String]) {
    if ids.iter().all(|s| s.trim().parse::<i64>().is_ok()) {
        ids.sort_by_key(|s| s.trim().parse::<i64>().unwrap());
    } else {
        ids.sort();
    }
}

pub fn read_panel<R: Read>(reader: R, schema: &ColumnSchema) -> Result<PanelDataset, PanelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize, PanelError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PanelError::MissingColumn(name.to_string()))
    };
    let (ci, ct, cy, cx) = (
        col(&schema.id)?,
        col(&schema.time)?,
        col(&schema.y)?,
        col(&schema.x)?,
    );
    let control_names: Vec<String> = match &schema.controls {
        Some(v) => v.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(j, _)| ![ci, ct, cy, cx].contains(j))
            .map(|(_, h)| h.to_string())
            .collect(),
    };
    let cc: Vec<usize> = control_names
        .iter()
        .map(|c| col(c))
        .collect::<Result<_, _>>()?;

    let mut cells: HashMap<(String, i64), (f64, f64, Vec<f64>)> = HashMap::new();
    let mut id_set = BTreeSet::new();
    let mut time_set = BTreeSet::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 1;
        let id = rec.get(ci).unwrap_or("").to_string();
        let time_s = rec.get(ct).unwrap_or("");
        let time = time_s
            .trim()
            .parse::<i64>()
            .map_err(|_| PanelError::NonNumericValue {
                row,
                column: schema.time.clone(),
                value: time_s.to_string(),
            })?;
        let y = parse_f64(rec.get(cy).unwrap_or(""), row, &schema.y)?;
        let x = parse_f64(rec.get(cx).unwrap_or(""), row, &schema.x)?;
        let cs = cc
            .iter()
            .zip(&control_names)
            .map(|(&j, name)| parse_f64(rec.get(j).unwrap_or(""), row, name))
            .collect::<Result<Vec<_>, _>>()?;
        if cells.insert((id.clone(), time), (y, x, cs)).is_some() {
            return Err(PanelError::DuplicateCell { id, time });
        }
        id_set.insert(id);
        time_set.insert(time);
    }
    if cells.is_empty() {
        return Err(PanelError::Empty);
    }
    let mut ids: Vec<String> = id_set.into_iter().collect();
    sort_ids(&mut ids);
    let times: Vec<i64> = time_set.into_iter().collect();
    for w in times.windows(2) {
        if w[1] != w[0] + 1 {
            return Err(PanelError::NonContiguousTimes { after: w[0] });
        }
    }
    let (n, t) = (ids.len(), times.len());
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    let mut c: Vec<DMatrix<f64>> = vec![DMatrix::zeros(n, t); cc.len()];
    for (i, id) in ids.iter().enumerate() {
        for (p, &time) in times.iter().enumerate() {
            let (vy, vx, vc) =
                cells
                    .get(&(id.clone(), time))
                    .ok_or_else(|| PanelError::UnbalancedPanel {
                        id: id.clone(),
                        time,
                    })?;
            y[(i, p)] = *vy;
            x[(i, p)] = *vx;
            for (k, v) in vc.iter().enumerate() {
                c[k][(i, p)] = *v;
            }
        }
    }
    let controls = control_names
        .into_iter()
        .zip(c)
        .map(|(name, values)| Control { name, values })
        .collect();
    PanelDataset::new(ids, times, y, x, controls)
}

/// Write the panel in long format, `id,time,y,x[,controls...]`, sorted by
/// (id, time). Floats use the shortest representation that round-trips.
pub fn write_panel<W: Write>(p: &PanelDataset, writer: W) -> Result<(), PanelError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "time".into(), "y".into(), "x".into()];
    header.extend(p.controls().iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    for i in 0..p.n() {
        for (t, time) in p.times().iter().enumerate() {
            let mut rec = vec![
                p.ids()[i].clone(),
                time.to_string(),
                format!("{:?}", p.y()[(i, t)]),
                format!("{:?}", p.x()[(i, t)]),
            ];
            rec.extend(
                p.controls()
                    .iter()
                    .map(|c| format!("{:?}", c.values[(i, t)])),
            );
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_panel(p: &PanelDataset, path: impl AsRef<Path>) -> Result<(), PanelError> {
    let f = std::fs::File::create(path)?;
    write_panel(p, std::io::BufWriter::new(f))
}
