use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Comment line heading every CSV artifact: version, command line and the
/// source of randomness.
#[derive(Debug, Clone)]
pub struct Provenance(String);

impl Provenance {
    pub fn new(source: &str) -> Self {
        let args: Vec<String> = std::env::args().skip(1).collect();
        Provenance(format!(
            "# solitaire {} | command: {} | source: {}",
            env!("CARGO_PKG_VERSION"),
            args.join(" "),
            source
        ))
    }

    pub fn line(&self) -> &str {
        &self.0
    }
}

/// `path` or stdout, buffered.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_csv(
    path: Option<&Path>,
    prov: &Provenance,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    let mut w = sink(path)?;
    writeln!(w, "{}", prov.line())?;
    body(&mut w)?;
    w.flush()
}

pub fn in_dir(dir: &Path, name: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

/// `key,value` rows.
pub fn write_pairs(w: &mut dyn Write, rows: &[(&str, String)]) -> io::Result<()> {
    writeln!(w, "key,value")?;
    for (k, v) in rows {
        writeln!(w, "{k},{v}")?;
    }
    Ok(())
}
