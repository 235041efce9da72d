//! Deterministic JSON output: fixed field order (struct order) and floats
//! printed with 15 significant digits, so identical inputs produce
//! byte-identical files across runs and platforms.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

struct SigDigitFormatter;

impl Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.14e}")
    }
}

/// Serializes with 15-significant-digit floats. Panics only if the value
/// cannot be serialized at all, which for the plain data types in this
/// crate cannot happen.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value
        .serialize(&mut ser)
        .expect("serialization of plain data cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}
