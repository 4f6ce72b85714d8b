//! Fixed-width text Gantt chart.
//!
//! One row per machine that carries at least one entry, one cell per time
//! unit. Occupied cells hold the `j<job>.<op>` label, `~` marks a lot in
//! transit to that machine, `!` marks a cell claimed twice, `.` is idle.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::instance::{Instance, MachineId};

use super::{end_time, Schedule};

#[derive(Clone, PartialEq)]
enum Cell {
    Idle,
    Busy(String),
    Transit,
    Clash,
}

fn label(job: usize, op: usize) -> String {
    format!("j{job}.{op}")
}

pub fn render_gantt(instance: &Instance, schedule: &Schedule) -> String {
    let entries = schedule.entries();
    let mut horizon = entries
        .iter()
        .map(|e| end_time(instance, e))
        .max()
        .unwrap_or(0);

    // transit intervals [end of op, end + shipping) on the receiving machine
    let mut transit: Vec<(MachineId, i64, i64)> = Vec::new();
    for a in entries {
        for b in entries {
            if b.job == a.job && b.op == a.op + 1 {
                let d = i64::from(instance.distance(a.machine, b.machine));
                if d > 0 {
                    let from = end_time(instance, a);
                    transit.push((b.machine, from, from + d));
                    horizon = horizon.max(from + d);
                }
            }
        }
    }

    let width = entries
        .iter()
        .map(|e| label(e.job, e.op).len())
        .chain(std::iter::once(horizon.max(1).to_string().len()))
        .max()
        .unwrap_or(1)
        .max(3);
    let slots = horizon.max(0) as usize;

    let mut rows: BTreeMap<MachineId, Vec<Cell>> = BTreeMap::new();
    for e in entries {
        let row = rows
            .entry(e.machine)
            .or_insert_with(|| vec![Cell::Idle; slots]);
        for t in e.start..end_time(instance, e) {
            let cell = &mut row[t as usize];
            *cell = match cell {
                Cell::Idle | Cell::Transit => Cell::Busy(label(e.job, e.op)),
                _ => Cell::Clash,
            };
        }
    }
    for (machine, from, to) in transit {
        if let Some(row) = rows.get_mut(&machine) {
            for t in from..to {
                if row[t as usize] == Cell::Idle {
                    row[t as usize] = Cell::Transit;
                }
            }
        }
    }

    let names: BTreeMap<MachineId, String> = rows
        .keys()
        .map(|&m| (m, format!("m{}/f{}", m, instance.machine(m).factory)))
        .collect();
    let name_width = names
        .values()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("machine".len());

    let mut out = String::new();
    let mut header = format!("{:<name_width$} |", "machine");
    for t in 0..slots {
        write!(header, " {:<width$}", t).unwrap();
    }
    out.push_str(header.trim_end());
    out.push('\n');
    for (machine, cells) in &rows {
        let mut line = format!("{:<name_width$} |", names[machine]);
        for cell in cells {
            let text = match cell {
                Cell::Idle => ".".to_string(),
                Cell::Busy(l) => l.clone(),
                Cell::Transit => "~".repeat(width),
                Cell::Clash => "!".repeat(width),
            };
            write!(line, " {:<width$}", text).unwrap();
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::{Job, Machine, Operation, ShippingMatrix};
    use crate::schedule::ScheduledOp;

    #[test]
    fn empty_schedule_is_header_only() {
        let inst = fixtures::worked_example();
        let s = Schedule::new(&inst, vec![]);
        assert_eq!(render_gantt(&inst, &s), "machine |\n");
    }

    #[test]
    fn worked_example_chart() {
        let inst = fixtures::worked_example();
        let s = Schedule::new(
            &inst,
            vec![
                fixtures::FIRST_OP_KEY.into(),
                fixtures::SECOND_OP_KEY.into(),
            ],
        );
        let chart = render_gantt(&inst, &s);
        let expected = "\
machine | 0    1    2
m0/f0   | j0.0 .    .
m2/f0   | .    j0.1 j0.1
";
        assert_eq!(chart, expected);
    }

    #[test]
    fn transit_and_clash_marks() {
        let inst = Instance {
            factories: 2,
            machines: vec![Machine { id: 0, factory: 0 }, Machine { id: 1, factory: 1 }],
            shipping: ShippingMatrix(vec![vec![0, 2], vec![2, 0]]),
            jobs: vec![
                Job {
                    id: 0,
                    operations: vec![Operation::new([(0, 1)]), Operation::new([(1, 1)])],
                },
                Job {
                    id: 1,
                    operations: vec![Operation::new([(0, 1)])],
                },
            ],
        };
        let s = Schedule::new(
            &inst,
            vec![
                ScheduledOp {
                    job: 0,
                    op: 0,
                    machine: 0,
                    start: 0,
                },
                ScheduledOp {
                    job: 0,
                    op: 1,
                    machine: 1,
                    start: 3,
                },
                ScheduledOp {
                    job: 1,
                    op: 0,
                    machine: 0,
                    start: 0,
                },
            ],
        );
        let chart = render_gantt(&inst, &s);
        let expected = "\
machine | 0    1    2    3
m0/f0   | !!!! .    .    .
m1/f1   | .    ~~~~ ~~~~ j0.1
";
        assert_eq!(chart, expected);
        assert_eq!(chart, render_gantt(&inst, &s));
    }
}
