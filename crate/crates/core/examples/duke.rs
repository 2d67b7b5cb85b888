//! Averages of the Duke statistic over fundamental discriminants.

use cmtrace::analytic::duke_window;

fn main() -> cmtrace::Result<()> {
    for (lo, hi) in [(100, 500), (500, 1000), (2000, 3000)] {
        let w = duke_window(lo, hi, 64)?;
        println!("[{lo}, {hi}]: mean {:.3} +- {:.3} over {} discriminants", w.mean, w.std_err, w.count);
    }
    Ok(())
}
