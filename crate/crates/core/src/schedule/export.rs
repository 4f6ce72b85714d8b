//! Row-per-operation text form: `job op machine start end factory`.

use std::fmt::Write as _;

use crate::instance::Instance;

use super::{end_time, Schedule, ScheduleError, ScheduledOp};

const HEADER: &str = "job op machine start end factory";

impl Schedule {
    pub fn to_export(&self, instance: &Instance) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for e in self.entries() {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                e.job,
                e.op,
                e.machine,
                e.start,
                end_time(instance, e),
                instance.machine(e.machine).factory
            )
            .unwrap();
        }
        out
    }

    /// Parses the export form; `end` and `factory` must agree with the
    /// instance.
    pub fn from_export(instance: &Instance, text: &str) -> Result<Schedule, ScheduleError> {
        let mut entries = Vec::new();
        let mut seen_header = false;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                if line.split_whitespace().collect::<Vec<_>>().join(" ") != HEADER {
                    return Err(ScheduleError::Parse {
                        line: line_no,
                        message: format!("expected header `{HEADER}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            let err = |message: String| ScheduleError::Parse {
                line: line_no,
                message,
            };
            let fields = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<i64>()
                        .map_err(|_| err(format!("`{f}` is not an integer")))
                })
                .collect::<Result<Vec<i64>, _>>()?;
            let [job, op, machine, start, end, factory] = fields[..] else {
                return Err(err(format!("expected 6 fields, found {}", fields.len())));
            };
            if job < 0 || op < 0 || machine < 0 || start < 0 {
                return Err(err("negative index or start".into()));
            }
            let entry = ScheduledOp {
                job: job as usize,
                op: op as usize,
                machine: machine as usize,
                start,
            };
            let Some(p) = instance.ptime(entry.job, entry.op, entry.machine) else {
                return Err(ScheduleError::UnknownReference(entry));
            };
            if end != start + i64::from(p) {
                return Err(err(format!(
                    "end {end} != start + processing time {}",
                    start + i64::from(p)
                )));
            }
            if factory != instance.machine(entry.machine).factory as i64 {
                return Err(err(format!(
                    "machine {machine} is not in factory {factory}"
                )));
            }
            entries.push(entry);
        }
        if !seen_header {
            return Err(ScheduleError::Parse {
                line: 1,
                message: "empty schedule document".into(),
            });
        }
        Ok(Schedule::new(instance, entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn worked_schedule() -> (Instance, Schedule) {
        let inst = fixtures::worked_example();
        let s = Schedule::new(
            &inst,
            vec![
                fixtures::FIRST_OP_KEY.into(),
                fixtures::SECOND_OP_KEY.into(),
            ],
        );
        (inst, s)
    }

    #[test]
    fn export_rows() {
        let (inst, s) = worked_schedule();
        assert_eq!(
            s.to_export(&inst),
            "job op machine start end factory\n0 0 0 0 1 0\n0 1 2 1 3 0\n"
        );
        assert_eq!(
            Schedule::from_export(&inst, &s.to_export(&inst)).unwrap(),
            s
        );
    }

    #[test]
    fn inconsistent_rows_are_rejected() {
        let inst = fixtures::worked_example();
        let bad_end = "job op machine start end factory\n0 0 0 0 5 0\n";
        assert!(matches!(
            Schedule::from_export(&inst, bad_end),
            Err(ScheduleError::Parse { line: 2, .. })
        ));
        let bad_machine = "job op machine start end factory\n0 0 2 0 1 0\n";
        assert!(matches!(
            Schedule::from_export(&inst, bad_machine),
            Err(ScheduleError::UnknownReference(_))
        ));
        assert!(Schedule::from_export(&inst, "").is_err());
        assert!(Schedule::from_export(&inst, "job op\n").is_err());
    }
}
