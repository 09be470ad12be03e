use std::io::{Read, Write};

use super::{BimatrixGame, MixedEquilibrium};
use crate::error::{Error, Result};

/// One row per (equilibrium, player): id, player (1 = row, 2 = column),
/// one probability per strategy, expected payoff.
pub fn write_equilibria_csv<W: Write>(
    out: W,
    game: &BimatrixGame,
    equilibria: &[MixedEquilibrium],
    decimals: Option<usize>,
) -> Result<()> {
    let fmt = |v: f64| match decimals {
        Some(d) => format!("{v:.d$}"),
        None => format!("{v:?}"),
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["equilibrium".to_string(), "player".to_string()];
    header.extend(game.row_labels.iter().cloned());
    header.push("expected_payoff".into());
    w.write_record(&header)?;
    for (id, eq) in equilibria.iter().enumerate() {
        for (player, strategy, payoff) in [
            (1, &eq.row_strategy, eq.row_payoff),
            (2, &eq.col_strategy, eq.col_payoff),
        ] {
            let mut rec = vec![(id + 1).to_string(), player.to_string()];
            rec.extend(strategy.iter().map(|p| fmt(*p)));
            rec.push(fmt(payoff));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the layout written by [`write_equilibria_csv`].
pub fn read_equilibria_csv<R: Read>(input: R) -> Result<Vec<MixedEquilibrium>> {
    let mut rdr = csv::Reader::from_reader(input);
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
    };
    let mut out: Vec<MixedEquilibrium> = Vec::new();
    let mut pending: Option<(String, Vec<f64>, f64)> = None;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 4 {
            return Err(Error::Parse("equilibrium row too short".into()));
        }
        let id = rec[0].to_string();
        let player = &rec[1];
        let probs = (2..rec.len() - 1).map(|i| parse(&rec[i])).collect::<Result<Vec<_>>>()?;
        let payoff = parse(&rec[rec.len() - 1])?;
        match (player, pending.take()) {
            ("1", None) => pending = Some((id, probs, payoff)),
            ("2", Some((pid, x, u))) if pid == id => out.push(MixedEquilibrium {
                row_strategy: x,
                col_strategy: probs,
                row_payoff: u,
                col_payoff: payoff,
                eq_type: None,
            }),
            _ => return Err(Error::Parse(format!("unexpected player row for equilibrium {id}"))),
        }
    }
    if pending.is_some() {
        return Err(Error::Parse("equilibrium missing its column-player row".into()));
    }
    Ok(out)
}
