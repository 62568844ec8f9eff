use std::time::{Duration, Instant};

/// A wall-clock budget shared down a call chain. Phases check it between
/// calls; per-call timeouts are capped against what remains.
#[derive(Debug, Clone, Copy)]
pub enum Deadline {
    At(Instant),
    Never,
}

impl Deadline {
    pub fn after(budget: Duration) -> Self {
        Deadline::At(Instant::now() + budget)
    }

    pub fn never() -> Self {
        Deadline::Never
    }

    pub fn remaining(&self) -> Duration {
        match self {
            Deadline::At(at) => at.saturating_duration_since(Instant::now()),
            Deadline::Never => Duration::MAX,
        }
    }

    pub fn expired(&self) -> bool {
        matches!(self, Deadline::At(at) if *at <= Instant::now())
    }

    /// Cap a per-call timeout to the remaining budget.
    pub fn cap(&self, timeout: Duration) -> Duration {
        timeout.min(self.remaining())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_and_expires() {
        let d = Deadline::after(Duration::from_millis(50));
        assert!(!d.expired());
        assert!(d.cap(Duration::from_secs(10)) <= Duration::from_millis(50));
        std::thread::sleep(Duration::from_millis(60));
        assert!(d.expired());
        assert_eq!(d.remaining(), Duration::ZERO);

        let never = Deadline::never();
        assert!(!never.expired());
        assert_eq!(never.cap(Duration::from_secs(3)), Duration::from_secs(3));
    }
}
