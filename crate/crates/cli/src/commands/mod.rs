pub mod accent;
pub mod eval_cmd;
pub mod gradcheck;
pub mod homographs;
pub mod train;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use accentor::dataset::{ParseIssue, ParsePolicy};

use crate::settings::CliError;

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn policy(strict: bool) -> ParsePolicy {
    if strict {
        ParsePolicy::Strict
    } else {
        ParsePolicy::Lenient
    }
}

/// Surface lenient-mode skips on the diagnostic stream.
pub fn report_issues(path: &Path, issues: &[ParseIssue]) {
    if issues.is_empty() {
        return;
    }
    eprintln!(
        "warning: {}: skipped {} unparseable item(s)",
        path.display(),
        issues.len()
    );
    for issue in issues.iter().take(5) {
        eprintln!("  {issue}");
    }
    if issues.len() > 5 {
        eprintln!("  ... and {} more", issues.len() - 5);
    }
}
