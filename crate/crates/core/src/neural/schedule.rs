/// Number of reflected-direction samples at 0-based `step`: `m0` doubled at
/// every fifth of training, `m0 · 2^⌊5·step/total⌋`.
pub fn schedule_m(step: u64, total_steps: u64, m0: u32) -> u32 {
    if total_steps == 0 {
        return m0;
    }
    let fifths = (5 * step.min(total_steps - 1) / total_steps) as u32;
    m0 << fifths
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_every_fifth() {
        let total = 5000;
        assert_eq!(schedule_m(0, total, 32), 32);
        assert_eq!(schedule_m(total / 5 - 1, total, 32), 32);
        assert_eq!(schedule_m(total / 5, total, 32), 64);
        assert_eq!(schedule_m(total * 3 / 5, total, 32), 256);
        assert_eq!(schedule_m(total - 1, total, 32), 512);
    }
}
