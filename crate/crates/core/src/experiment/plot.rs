use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::config::{parse_layer, Config};
use crate::transfer::io::read_vector;

/// Figure identifiers understood by [`emit_plotdata`].
pub const FIGURES: [&str; 4] = ["delta-n", "rho-mean", "mode2-field", "threshold-curve"];

fn read(bundle: &Path, rel: &str) -> Result<String> {
    fs::read_to_string(bundle.join(rel)).map_err(|e| Error::Parse {
        source_name: bundle.join(rel).display().to_string(),
        message: e.to_string(),
    })
}

/// Copy selected CSV columns as whitespace-separated rows.
fn columns(text: &str, keep: &[usize], header: &str) -> String {
    let mut out = format!("# {header}\n");
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let row: Vec<&str> = keep.iter().filter_map(|&i| fields.get(i).copied()).collect();
        if row.len() == keep.len() && !row.contains(&"NaN") {
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

/// Write `plot/<figure>.dat` inside a result bundle and return its path.
pub fn emit_plotdata(bundle: &Path, figure: &str) -> Result<PathBuf> {
    let data = match figure {
        "delta-n" => columns(&read(bundle, "delta_n.csv")?, &[0, 1], "N delta"),
        "rho-mean" => columns(&read(bundle, "rho_mean_plus.csv")?, &[0, 1], "level mean_rho"),
        "threshold-curve" => columns(
            &read(bundle, "threshold_curve_plus.csv")?,
            &[0, 1, 3],
            "threshold measure rho",
        ),
        "mode2-field" => {
            let config = Config::resolve(None, None, &[parse_layer(&read(bundle, "config.toml")?, "config.toml")?])?;
            let grid = config.grid()?;
            let w = read_vector(read(bundle, "vectors/checkpoint_0_mode_2.csv")?.as_bytes(), "mode 2")?;
            if w.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: w.len(),
                });
            }
            let mut out = String::from(if grid.dim() == 1 { "# x w\n" } else { "# x y w\n" });
            for (i, v) in w.iter().enumerate() {
                let c = grid.center(i);
                let coords: Vec<String> = c.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(out, "{} {v:?}", coords.join(" "));
            }
            out
        }
        other => {
            return Err(Error::Config(format!(
                "unknown figure {other:?}; expected one of {}",
                FIGURES.join(", ")
            )))
        }
    };
    let dir = bundle.join("plot");
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{figure}.dat"));
    fs::write(&path, data)?;
    Ok(path)
}
