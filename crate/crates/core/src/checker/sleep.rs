use std::time::Duration;

use super::{Cancel, CheckInput, Checker, Outcome, Output, Report, Sink};
use crate::message::{Message, Phase, Severity};
use crate::text::TextRange;

/// Stub that just takes time. A non-cooperative one ignores cancellation,
/// standing in for a checker that must be abandoned at the deadline.
pub struct SleepChecker {
    pub duration: Duration,
    pub cooperative: bool,
}

impl SleepChecker {
    pub fn new(duration: Duration) -> Self {
        SleepChecker {
            duration,
            cooperative: true,
        }
    }

    pub fn stubborn(duration: Duration) -> Self {
        SleepChecker {
            duration,
            cooperative: false,
        }
    }
}

impl Checker for SleepChecker {
    fn check(&self, input: &CheckInput<'_>, cancel: &Cancel, sink: Sink<'_>) -> Outcome {
        let whole = TextRange::new(0, input.content.chars().count());
        let start = Message::new(Severity::Status, Phase::Syntax, whole, "started");
        sink(Output::Message(start.clone()));
        if self.cooperative {
            if !cancel.sleep(self.duration) {
                return Outcome::Cancelled;
            }
        } else {
            std::thread::sleep(self.duration);
        }
        let done = Message::new(
            Severity::Writeln,
            Phase::Semantics,
            whole,
            format!("slept {} ms", self.duration.as_millis()),
        );
        sink(Output::Message(done.clone()));
        Outcome::Finished(Report {
            messages: vec![start, done],
            ..Report::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::NodeName;
    use std::time::Instant;

    #[test]
    fn cooperative_sleep_cancels_promptly() {
        let node = NodeName::auxiliary("x.slow").unwrap();
        let input = CheckInput {
            node: &node,
            content: "zz",
            header: None,
        };
        let c = SleepChecker::new(Duration::from_secs(60));
        let cancel = Cancel::new();
        let t0 = Instant::now();
        let killer = {
            let cancel = cancel.clone();
            std::thread::spawn(move || {
                std::thread::sleep(Duration::from_millis(50));
                cancel.cancel();
            })
        };
        assert_eq!(c.check(&input, &cancel, &super::super::discard), Outcome::Cancelled);
        killer.join().unwrap();
        assert!(t0.elapsed() < Duration::from_secs(2));
    }
}
