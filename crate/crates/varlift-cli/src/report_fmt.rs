//! JSON emission with every float at 17 significant digits, so reports are
//! byte-deterministic and lossless.

use serde::Serialize;
use serde_json::ser::Formatter;

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}
