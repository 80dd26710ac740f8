use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty JSON with every float written to 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(float(value).as_bytes())
    }

    forward!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializable record");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8 json")
}

/// Hex SHA-256 of the canonical JSON form of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("serializable config");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub solver_tolerance: f64,
    pub quadrature_order: Option<usize>,
}

impl Provenance {
    pub fn new<T: Serialize>(config: &T, solver_tolerance: f64, quadrature_order: Option<usize>) -> Self {
        Provenance {
            tool: "llfisher",
            version: VERSION,
            config_hash: config_hash(config),
            solver_tolerance,
            quadrature_order,
        }
    }

    pub const CSV_HEADER: [&'static str; 4] = ["config_hash", "version", "solver_tolerance", "quadrature_order"];

    pub fn csv_fields(&self) -> [String; 4] {
        [
            self.config_hash.clone(),
            self.version.to_string(),
            float(self.solver_tolerance),
            self.quadrature_order.map(|o| o.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV text from a header and string rows.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}
