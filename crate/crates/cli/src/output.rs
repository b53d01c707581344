use std::io::Write;

use anyhow::Result;
use dmrank_core::report::{fixed, round_json};
use serde::Serialize;

use crate::Format;

#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub format: Format,
    pub precision: usize,
}

impl Ctx {
    pub fn num(&self, v: f64) -> String {
        fixed(v, self.precision)
    }

    /// Pretty JSON with every float rounded; object keys come out sorted.
    pub fn json<T: Serialize>(&self, out: &mut dyn Write, value: &T) -> Result<()> {
        let mut doc = serde_json::to_value(value)?;
        round_json(&mut doc, self.precision);
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(())
    }
}

pub fn csv<I, R>(out: &mut dyn Write, header: Option<&[&str]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = ::csv::WriterBuilder::new().flexible(true).from_writer(out);
    if let Some(header) = header {
        writer.write_record(header)?;
    }
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}
