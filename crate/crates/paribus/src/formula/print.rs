//! Canonical formula printing.
//!
//! Output grammar matches the parser: `~` and modalities bind tightest, `&`
//! chains are right-associative and printed flat, and any conjunction nested
//! in an operand position is parenthesized. The dual-modality pattern
//! `~ modal ~f` is rendered with the dual bracket (`[{p}] f`, `<{1}:stit> f`,
//! `box{1} f`, `<> f`), so box forms survive a parse/print round trip.

use super::{Formula, Modality};

/// Renders `f` as canonical text; `parse(print(f))` yields a tree equal to `f`.
pub fn print<M: Modality>(f: &Formula<M>) -> String {
    let mut out = String::new();
    write_free(f, &mut out);
    out
}

/// Writes `f` where a conjunction chain may appear without parentheses.
fn write_free<M: Modality>(f: &Formula<M>, out: &mut String) {
    if let Formula::And(a, b) = f {
        write_operand(a, out);
        out.push_str(" & ");
        write_free(b, out);
    } else {
        write_nonchain(f, out);
    }
}

/// Writes `f` in an operand position: conjunctions get parentheses.
fn write_operand<M: Modality>(f: &Formula<M>, out: &mut String) {
    if matches!(f, Formula::And(..)) {
        out.push('(');
        write_free(f, out);
        out.push(')');
    } else {
        write_nonchain(f, out);
    }
}

fn write_nonchain<M: Modality>(f: &Formula<M>, out: &mut String) {
    if let Some((m, body)) = f.as_dual_modal() {
        m.write_dual(out);
        out.push(' ');
        write_operand(body, out);
        return;
    }
    match f {
        Formula::Top => out.push('T'),
        Formula::Atom(a) => out.push_str(a.name()),
        Formula::Not(g) => {
            out.push('~');
            write_operand(g, out);
        }
        Formula::Modal(m, g) => {
            m.write_primitive(out);
            out.push(' ');
            write_operand(g, out);
        }
        Formula::And(..) => unreachable!("conjunctions are handled by write_free"),
    }
}
