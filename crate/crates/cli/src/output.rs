use std::fs;
use std::io::{self, Write};
use std::path::Path;

use flowreach::report::Report;

use crate::Common;

pub fn render(common: &Common, report: &Report) -> io::Result<String> {
    if common.json {
        let mut s = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
        s.push('\n');
        Ok(s)
    } else {
        Ok(report.to_text())
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    fs::write(dir.join(name), contents)
}

/// Writes the report (and artifacts, if an output directory is set) and prints the
/// report to stdout, or to stderr when `stdout_payload` takes stdout.
pub fn emit(
    common: &Common,
    report: &Report,
    artifacts: &[(&str, String)],
    stdout_payload: Option<&str>,
) -> io::Result<()> {
    let text = render(common, report)?;
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        let name = if common.json { "report.json" } else { "report.txt" };
        write_file(dir, name, &text)?;
        for (file, contents) in artifacts {
            write_file(dir, file, contents)?;
        }
    }
    match stdout_payload {
        Some(payload) => {
            io::stdout().write_all(payload.as_bytes())?;
            io::stderr().write_all(text.as_bytes())
        }
        None => io::stdout().write_all(text.as_bytes()),
    }
}
