//! Deterministic scenario generators: grid mobility models, meeting
//! (intermittent-connectivity) task formulas, and the matching
//! recurrence-sweep automata. Identical parameters produce byte-equal
//! output files.

use planner_core::automaton::{emit_nba, Guard, Nba};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

#[derive(Serialize)]
struct ModelJson {
    robots: Vec<RobotJson>,
}

#[derive(Serialize)]
struct RobotJson {
    id: u32,
    states: Vec<String>,
    initial: String,
    edges: Vec<(String, String, f64)>,
}

/// Grid mobility model: `rows x cols` cells named `l1..` in row-major
/// order, 4-neighbor moves at Euclidean cost 1, zero-cost self-loops,
/// and optionally up to four diagonal links between the center cell and
/// its diagonal neighbors (cost sqrt(2), odd-sized grids only), added
/// in the order upper-left, upper-right, lower-left, lower-right.
/// Robot `i` starts at cell `l(((i-1) mod cells) + 1)`.
pub fn grid_model(rows: usize, cols: usize, robots: usize, diagonals: usize) -> Result<String, GenError> {
    if rows == 0 || cols == 0 || robots == 0 {
        return Err(GenError::BadParams(
            "rows, cols and robots must be positive".into(),
        ));
    }
    if diagonals > 4 {
        return Err(GenError::BadParams("at most 4 diagonals".into()));
    }
    if diagonals > 0 && (rows.is_multiple_of(2) || cols.is_multiple_of(2)) {
        return Err(GenError::BadParams(
            "diagonals require an odd-sized grid (they attach to the center cell)".into(),
        ));
    }
    let cells = rows * cols;
    let name = |r: usize, c: usize| format!("l{}", r * cols + c + 1);

    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            edges.push((name(r, c), name(r, c), 0.0));
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((name(r, c), name(r, c + 1), 1.0));
                edges.push((name(r, c + 1), name(r, c), 1.0));
            }
            if r + 1 < rows {
                edges.push((name(r, c), name(r + 1, c), 1.0));
                edges.push((name(r + 1, c), name(r, c), 1.0));
            }
        }
    }
    if diagonals > 0 {
        let (cr, cc) = (rows / 2, cols / 2);
        let corners = [
            (cr.wrapping_sub(1), cc.wrapping_sub(1)),
            (cr.wrapping_sub(1), cc + 1),
            (cr + 1, cc.wrapping_sub(1)),
            (cr + 1, cc + 1),
        ];
        let w = 2.0_f64.sqrt();
        for &(r, c) in corners.iter().take(diagonals) {
            if r >= rows || c >= cols {
                return Err(GenError::BadParams(
                    "grid too small for diagonal links".into(),
                ));
            }
            edges.push((name(cr, cc), name(r, c), w));
            edges.push((name(r, c), name(cr, cc), w));
        }
    }

    let states: Vec<String> = (1..=cells).map(|i| format!("l{i}")).collect();
    let robots: Vec<RobotJson> = (1..=robots)
        .map(|id| RobotJson {
            id: id as u32,
            states: states.clone(),
            initial: format!("l{}", (id - 1) % cells + 1),
            edges: edges.clone(),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&ModelJson { robots }).expect("serializable") + "\n")
}

/// One meeting event: a set of robots jointly at a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Meeting {
    pub robots: Vec<u32>,
    pub region: String,
}

impl Meeting {
    pub fn atoms(&self) -> Vec<String> {
        self.robots
            .iter()
            .map(|r| format!("r{r}@{}", self.region))
            .collect()
    }

    fn conjunction_text(&self) -> String {
        self.atoms().join(" & ")
    }

    fn guard(&self) -> Guard {
        Guard::conjoin(self.atoms().into_iter().map(Guard::Atom).collect())
    }
}

/// Parse `"1,2@l5;2,3,4@l1"` into meeting events.
pub fn parse_meetings(spec: &str) -> Result<Vec<Meeting>, GenError> {
    let mut out = Vec::new();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (ids, region) = part
            .split_once('@')
            .ok_or_else(|| GenError::BadParams(format!("meeting {part:?} lacks `@region`")))?;
        let robots: Vec<u32> = ids
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| GenError::BadParams(format!("bad robot id {s:?}")))
            })
            .collect::<Result<_, _>>()?;
        if robots.is_empty() || region.trim().is_empty() {
            return Err(GenError::BadParams(format!("meeting {part:?} is incomplete")));
        }
        out.push(Meeting {
            robots,
            region: region.trim().to_string(),
        });
    }
    if out.is_empty() {
        return Err(GenError::BadParams("no meetings given".into()));
    }
    Ok(out)
}

/// Parse `"1,2@l5:1@l7"`: before robot 1 reaches l7, robots 1 and 2 must
/// not meet at l5.
pub fn parse_until(spec: &str) -> Result<(Meeting, String), GenError> {
    let (neg, trig) = spec
        .split_once(':')
        .ok_or_else(|| GenError::BadParams("until spec needs `meeting:robot@region`".into()))?;
    let meetings = parse_meetings(neg)?;
    if meetings.len() != 1 {
        return Err(GenError::BadParams("until spec takes one meeting".into()));
    }
    let (robot, region) = trig
        .trim()
        .split_once('@')
        .ok_or_else(|| GenError::BadParams("until trigger needs `robot@region`".into()))?;
    let robot: u32 = robot
        .parse()
        .map_err(|_| GenError::BadParams(format!("bad robot id {robot:?}")))?;
    Ok((
        meetings.into_iter().next().unwrap(),
        format!("r{robot}@{}", region.trim()),
    ))
}

/// Meeting-recurrence task text: one `[] <>` conjunct per meeting, plus
/// an optional `(!meeting) U trigger` prelude.
pub fn intermittent_formula(meetings: &[Meeting], until: Option<&(Meeting, String)>) -> String {
    let mut parts: Vec<String> = meetings
        .iter()
        .map(|m| format!("[] <> ({})", m.conjunction_text()))
        .collect();
    if let Some((neg, trigger)) = until {
        parts.push(format!("(!({}) U {trigger})", neg.conjunction_text()));
    }
    format!("# meeting recurrence task\n{}\n", parts.join(" & "))
}

/// Automaton for the same task family: a sweep that waits for each
/// meeting in turn and restarts after the last one, preceded by a
/// waiting state when an until-prelude is present. Accepts exactly the
/// words where every meeting recurs forever (and the prelude holds).
pub fn intermittent_nba(meetings: &[Meeting], until: Option<&(Meeting, String)>) -> Nba {
    let mut atoms: Vec<String> = Vec::new();
    for m in meetings {
        for a in m.atoms() {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
    }
    if let Some((neg, trig)) = until {
        for a in neg.atoms() {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
        if !atoms.contains(trig) {
            atoms.push(trig.clone());
        }
    }
    let mut nba = Nba::new(atoms);

    let pre = until.map(|_| nba.add_state("pre"));
    let waits: Vec<_> = (1..=meetings.len())
        .map(|j| nba.add_state(format!("w{j}")))
        .collect();
    let acc = nba.add_state("acc");
    nba.mark_initial(pre.unwrap_or(waits[0]));
    nba.mark_accepting(acc);

    if let (Some(pre), Some((neg, trig))) = (pre, until) {
        // wait while the forbidden meeting has not happened and the
        // trigger has not fired; leave on the trigger
        let hold = Guard::and(
            Guard::not(neg.guard()),
            Guard::not(Guard::Atom(trig.clone())),
        );
        nba.add_edge(pre, hold, pre).expect("atoms in alphabet");
        nba.add_edge(pre, Guard::Atom(trig.clone()), waits[0])
            .expect("atoms in alphabet");
    }
    for (j, m) in meetings.iter().enumerate() {
        let next = if j + 1 < meetings.len() { waits[j + 1] } else { acc };
        nba.add_edge(waits[j], Guard::True, waits[j]).expect("ok");
        nba.add_edge(waits[j], m.guard(), next).expect("ok");
    }
    nba.add_edge(acc, Guard::True, waits[0]).expect("ok");
    nba
}

pub fn intermittent_nba_text(meetings: &[Meeting], until: Option<&(Meeting, String)>) -> String {
    emit_nba(&intermittent_nba(meetings, until))
}
