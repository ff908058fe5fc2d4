//! Exact two-photon projection probabilities in the polarization basis.
//!
//! A photon pair prepared as a'_H b'_V |0> and measured in the diagonal
//! basis |D> = (|H> + |V>)/sqrt(2), |A> = (|H> - |V>)/sqrt(2) shows the
//! bosonic enhancement directly: with the photons on separate paths the
//! joint projection onto D x D has probability 1/4, but with both photons
//! bunched onto one path the doubly occupied projector picks up a sqrt(2)
//! and the probability doubles to 1/2.
//!
//! Polarization labels name modes, so H/V and D/A are different frames of
//! the same space; the basis-change transform rewrites a state in the
//! diagonal frame, after which projections are plain mode-space overlaps.
//!
//! Run with `cargo run --example projection_probabilities`.

use bosim::fock::{ModeLabel, Path, PhotonicState, Polarization};
use bosim::optics::da_basis_change;

fn main() -> bosim::Result<()> {
    let a_h = ModeLabel::new(Path::A, Polarization::H, 0);
    let a_v = ModeLabel::new(Path::A, Polarization::V, 0);
    let b_v = ModeLabel::new(Path::B, Polarization::V, 0);
    let a_d = ModeLabel::new(Path::A, Polarization::D, 0);
    let a_a = ModeLabel::new(Path::A, Polarization::A, 0);
    let b_d = ModeLabel::new(Path::B, Polarization::D, 0);

    let rotate_a = da_basis_change(Path::A)?;
    let rotate_b = da_basis_change(Path::B)?;

    println!("two-photon projections onto the diagonal basis");
    println!();

    // Photons on separate paths: no bunching, P(D, D) = 1/4.
    let separate = PhotonicState::vacuum()
        .create(a_h)?
        .create(b_v)?
        .normalize()?
        .apply_transform(&rotate_a)?
        .apply_transform(&rotate_b)?;
    let projector_dd = PhotonicState::vacuum().create(a_d)?.create(b_d)?.normalize()?;
    let p_separate = separate.projection_probability(&projector_dd)?;
    println!("  photons on paths a and b       P(D_a, D_b)    = {p_separate:.6}");
    println!(
        "  underlying amplitude           <D_a D_b|HV>   = {:.6}",
        separate
            .amplitude(&bosim::fock::OccupationVector::pair(a_d, b_d))
            .re
    );

    // Both photons on one path: the pair state splits into
    // (|2_D> - |2_A>)/sqrt(2), so the doubly occupied D projector takes 1/2.
    let bunched = PhotonicState::vacuum()
        .create(a_h)?
        .create(a_v)?
        .normalize()?
        .apply_transform(&rotate_a)?;
    let double_d = PhotonicState::vacuum().create(a_d)?.create(a_d)?.normalize()?;
    let p_bunched = bunched.projection_probability(&double_d)?;
    println!("  photon pair bunched on path a  P(2 photons D) = {p_bunched:.6}");

    println!();
    println!(
        "  enhancement factor from bunching: {:.3} (expected 2)",
        p_bunched / p_separate
    );

    // Orthogonal diagonal outcomes on the bunched pair are symmetric and,
    // together with the vanishing mixed D/A amplitude, exhaust the state.
    let double_a = PhotonicState::vacuum().create(a_a)?.create(a_a)?.normalize()?;
    let mixed = PhotonicState::vacuum().create(a_d)?.create(a_a)?.normalize()?;
    let p_double_a = bunched.projection_probability(&double_a)?;
    let p_mixed = bunched.projection_probability(&mixed)?;
    println!();
    println!("  P(2 photons A)  = {p_double_a:.6}");
    println!("  P(one D, one A) = {p_mixed:.6}");
    println!(
        "  total over the diagonal basis = {:.6}",
        p_bunched + p_double_a + p_mixed
    );
    Ok(())
}
