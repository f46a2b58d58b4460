use std::fs::File;
use std::io::{self, BufWriter, Write};

use crate::config::RunConfig;
use crate::CliError;

pub const SIG_DIGITS: usize = 12;

/// Plain decimal with `digits` significant digits; scientific notation only
/// far from unity.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-6..=9).contains(&mag) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // A round-up can add a digit (9.99.. -> 10.0..); drop the surplus.
    if s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() > digits && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

pub fn num(x: f64) -> String {
    fmt_sig(x, SIG_DIGITS)
}

/// CSV sink with a leading `#` line recording version, config hash and seed.
pub struct CsvOut {
    writer: csv::Writer<Box<dyn Write>>,
    percent: bool,
}

impl CsvOut {
    pub fn open(cfg: &RunConfig, header: &[&str]) -> Result<Self, CliError> {
        let mut sink: Box<dyn Write> = match &cfg.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        writeln!(
            sink,
            "# pcap {} command={} config_sha256={} seed={}",
            env!("CARGO_PKG_VERSION"),
            cfg.command,
            cfg.hash(),
            cfg.seed
        )?;
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(header)?;
        Ok(CsvOut { writer, percent: cfg.percent })
    }

    /// A noise parameter, scaled to percent when requested.
    pub fn param(&self, x: f64) -> String {
        if self.percent {
            num(100.0 * x)
        } else {
            num(x)
        }
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_sig(0.0630965416384, 12), "0.0630965416384");
        assert_eq!(fmt_sig(1.0, 12), "1.00000000000");
        assert_eq!(fmt_sig(6.30965416384, 12), "6.30965416384");
        assert_eq!(fmt_sig(-0.5, 3), "-0.500");
        assert_eq!(fmt_sig(9.9999999999999, 12), "10.0000000000");
        assert_eq!(fmt_sig(1.5e-9, 3), "1.50e-9");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }
}
