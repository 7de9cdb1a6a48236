//! Terminal session loop.

use std::io::{BufRead, Write};

use anyhow::Result;
use loebench_core::sim::{CubeLocation, GridPos};
use loebench_core::transcript::EventBody;
use loebench_core::{DialogSession, RepairAction, SessionError, SessionSetup, SessionStatus, TranscriptEvent};

const HELP: &str = "commands: :continue | :swap <cube> <qr> | :move <cube> <x> <y> | :state | :quit | :help (anything else is a question to the robot)";

enum Input {
    Say(String),
    Continue,
    Repair(RepairAction),
    State,
    Quit,
    Help,
    Invalid(String),
}

fn parse(line: &str) -> Option<Input> {
    let line = line.trim();
    if line.is_empty() {
        return None;
    }
    let Some(cmd) = line.strip_prefix(':') else {
        return Some(Input::Say(line.to_owned()));
    };
    let args: Vec<&str> = cmd.split_whitespace().collect();
    let input = match args.as_slice() {
        ["continue"] => Input::Continue,
        ["state"] => Input::State,
        ["quit"] => Input::Quit,
        ["help"] => Input::Help,
        ["swap", cube, qr] => match cube.parse() {
            Ok(cube_id) => Input::Repair(RepairAction::SwapCube {
                cube_id,
                new_qr: (*qr).to_owned(),
            }),
            Err(_) => Input::Invalid(format!("bad cube id `{cube}`")),
        },
        ["move", cube, x, y] => match (cube.parse(), x.parse(), y.parse()) {
            (Ok(cube_id), Ok(x), Ok(y)) => Input::Repair(RepairAction::MoveCube {
                cube_id,
                new_position: GridPos::new(x, y),
            }),
            _ => Input::Invalid("usage: :move <cube> <x> <y>".to_owned()),
        },
        _ => Input::Invalid(format!("unknown command `:{cmd}`")),
    };
    Some(input)
}

fn print_events(out: &mut impl Write, events: &[TranscriptEvent]) -> Result<()> {
    for e in events {
        match &e.body {
            EventBody::ErrorRaised { error, cube_id } => writeln!(out, "! robot stopped: {error} (cube {cube_id})")?,
            EventBody::RobotUtterance { text, level } => writeln!(out, "robot [{level}]: {text}")?,
            EventBody::Fallback { text } => writeln!(out, "robot: {text}")?,
            EventBody::Sorted { cube_id, shelf } => writeln!(out, "  cube {cube_id} -> {shelf}")?,
            EventBody::Repair {
                rejected: Some(reason), ..
            } => writeln!(out, "  repair rejected: {reason}")?,
            EventBody::Repair { action, .. } => writeln!(out, "  repair applied to cube {}", action.cube_id())?,
            EventBody::SessionResolved {} => writeln!(out, "session resolved")?,
            EventBody::SessionAbandoned { reason } => writeln!(out, "session abandoned: {reason}")?,
            _ => {}
        }
    }
    Ok(())
}

fn print_state(out: &mut impl Write, s: &DialogSession) -> Result<()> {
    let w = s.world();
    writeln!(out, "status: {:?}", s.status())?;
    match s.dialog() {
        Some(d) => writeln!(out, "dialog: {} on cube {} at {}", d.error, d.cube_id, d.current_level)?,
        None => writeln!(out, "dialog: none")?,
    }
    writeln!(out, "robot: {:?}", w.robot_phase)?;
    writeln!(
        out,
        "table: {}x{}, reach square {}..{}",
        w.table_extent.width, w.table_extent.height, w.reach_region.min, w.reach_region.max
    )?;
    let qrs: Vec<String> = w.qr_database.iter().map(|(q, s)| format!("{q}->{s}")).collect();
    writeln!(out, "qr database: {}", qrs.join(", "))?;
    for c in &w.cubes {
        let at = match &c.location {
            CubeLocation::Table(p) => format!("table {p}"),
            CubeLocation::Shelf(id) => format!("shelf {id}"),
        };
        writeln!(out, "cube {} qr={} {at}", c.id, c.qr)?;
    }
    Ok(())
}

/// Runs a session against line-oriented input until it resolves, the user
/// quits, or input ends (which abandons the session).
pub fn run(setup: SessionSetup, input: impl BufRead, mut out: impl Write, prompt: bool) -> Result<DialogSession> {
    let mut session = DialogSession::new("interactive", setup)?;
    let started = session.advance()?;
    print_events(&mut out, &started)?;
    let mut lines = input.lines();
    while session.status() == SessionStatus::Running {
        if prompt {
            write!(out, "> ")?;
            out.flush()?;
        }
        let Some(line) = lines.next() else {
            let events = session.abandon("end of input")?;
            print_events(&mut out, &events)?;
            break;
        };
        let Some(input) = parse(&line?) else {
            continue;
        };
        let mark = session.transcript().len();
        let result = match input {
            Input::Say(text) => session.handle_utterance(&text),
            Input::Continue => session.handle_continue(),
            Input::Repair(action) => session.handle_repair(action),
            Input::Quit => session.abandon("user quit"),
            Input::State => {
                print_state(&mut out, &session)?;
                continue;
            }
            Input::Help => {
                writeln!(out, "{HELP}")?;
                continue;
            }
            Input::Invalid(msg) => {
                writeln!(out, "{msg}")?;
                writeln!(out, "{HELP}")?;
                continue;
            }
        };
        print_events(&mut out, &session.transcript()[mark..])?;
        match result {
            Ok(_) | Err(SessionError::RepairRejected(_)) => {}
            Err(e @ (SessionError::NoDialog | SessionError::DialogOpen | SessionError::NotRunning(_))) => {
                writeln!(out, "{e}")?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.flush()?;
    Ok(session)
}
