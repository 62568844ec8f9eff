use std::path::PathBuf;

use anyhow::Context;

use dsp_core::{Deadline, Diagnostic};
use dsp_phases::{mask_errors, parse_sketch, repair_loop, rewrite_placeholders, translation_rate};

use crate::config::RunConfig;

pub fn run(
    sketch_path: PathBuf,
    diagnostics: Option<PathBuf>,
    verify: bool,
    config_path: Option<PathBuf>,
) -> anyhow::Result<()> {
    let source = std::fs::read_to_string(&sketch_path)
        .with_context(|| format!("reading sketch {}", sketch_path.display()))?;
    let statement_id = sketch_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sketch".into());
    let mut sketch = rewrite_placeholders(parse_sketch(&statement_id, &source));
    let original = sketch.clone();

    if verify {
        let config_path = config_path.context("--verify requires --config")?;
        let mut config = RunConfig::load(&config_path)?;
        config.anchor_paths(&config_path);
        let ctx = config.build_context(None)?;
        // Header = the sketch's leading import lines, if any.
        let header: String = source
            .lines()
            .take_while(|l| l.trim_start().starts_with("import "))
            .collect::<Vec<_>>()
            .join("\n");
        let session = ctx
            .verifier
            .open_session(&header)
            .map_err(|e| anyhow::anyhow!("opening verifier session: {e}"))?;
        repair_loop(&mut sketch, ctx.verifier.as_ref(), &session, Deadline::never(), &ctx.repair)
            .map_err(|e| anyhow::anyhow!("repair failed: {e}"))?;
    } else {
        let diagnostics_path = diagnostics.context("pass --diagnostics FILE or --verify")?;
        let text = std::fs::read_to_string(&diagnostics_path)
            .with_context(|| format!("reading diagnostics {}", diagnostics_path.display()))?;
        let diags: Vec<Diagnostic> = serde_json::from_str(&text)
            .with_context(|| format!("parsing diagnostics {}", diagnostics_path.display()))?;
        mask_errors(&mut sketch, &diags).map_err(|e| anyhow::anyhow!("masking failed: {e}"))?;
        sketch.translation_rate = translation_rate(&original, &sketch);
    }

    // Repaired sketch on stdout; the rate goes to stderr so stdout stays
    // byte-comparable against goldens.
    print!("{}", sketch.render());
    eprintln!("translation_rate: {:.4}", sketch.translation_rate);
    Ok(())
}
