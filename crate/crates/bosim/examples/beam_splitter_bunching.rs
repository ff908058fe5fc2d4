//! Photon bunching at a beam splitter.
//!
//! Two photons entering a splitter of reflectivity r from opposite ports
//! leave in coincidence with probability (2r - 1)^2 when they are
//! indistinguishable: the reflected-reflected and transmitted-transmitted
//! amplitudes interfere destructively, and at r = 1/2 the photons always
//! bunch into the same output. Orthogonally polarized photons carry
//! which-path information and keep the classical rate r^2 + (1 - r)^2.
//!
//! Run with `cargo run --example beam_splitter_bunching`.

use bosim::fock::{ModeLabel, Path, PhotonicState, Polarization};
use bosim::optics::{beam_splitter_transform, post_select_same_output};

fn coincidence_basis() -> bosim::Result<Vec<PhotonicState>> {
    let mut basis = Vec::new();
    for p1 in [Polarization::H, Polarization::V] {
        for p2 in [Polarization::H, Polarization::V] {
            basis.push(
                PhotonicState::vacuum()
                    .create(ModeLabel::new(Path::APrime, p1, 0))?
                    .create(ModeLabel::new(Path::BPrime, p2, 0))?
                    .normalize()?,
            );
        }
    }
    Ok(basis)
}

fn main() -> bosim::Result<()> {
    let a_h = ModeLabel::new(Path::A, Polarization::H, 0);
    let b_h = ModeLabel::new(Path::B, Polarization::H, 0);
    let b_v = ModeLabel::new(Path::B, Polarization::V, 0);
    let basis = coincidence_basis()?;

    println!("coincidence probability after the splitter");
    println!();
    println!("  reflectivity   indistinguishable   (2r-1)^2   orthogonal   r^2+(1-r)^2");
    for r in [0.3, 0.4, 0.5, 0.6, 0.7] {
        let splitter =
            beam_splitter_transform(r, (Path::A, Path::B), (Path::APrime, Path::BPrime))?;

        let same = PhotonicState::vacuum()
            .create(a_h)?
            .create(b_h)?
            .normalize()?
            .apply_transform(&splitter)?;
        let p_same = same.subspace_projection_probability(&basis)?;

        let orthogonal = PhotonicState::vacuum()
            .create(a_h)?
            .create(b_v)?
            .normalize()?
            .apply_transform(&splitter)?;
        let p_orthogonal = orthogonal.subspace_projection_probability(&basis)?;

        println!(
            "  {r:>12.2}   {p_same:>17.6}   {:>8.4}   {p_orthogonal:>10.6}   {:>11.4}",
            (2.0 * r - 1.0).powi(2),
            r * r + (1.0 - r) * (1.0 - r)
        );
    }

    let balanced =
        beam_splitter_transform(0.5, (Path::A, Path::B), (Path::APrime, Path::BPrime))?;
    let bunched = PhotonicState::vacuum()
        .create(a_h)?
        .create(b_h)?
        .normalize()?
        .apply_transform(&balanced)?;
    let (_, p_a) = post_select_same_output(&bunched, Path::APrime)?;
    let (_, p_b) = post_select_same_output(&bunched, Path::BPrime)?;
    println!();
    println!("  at r = 1/2 the identical pair bunches completely:");
    println!("    P(both photons in a') = {p_a:.6}");
    println!("    P(both photons in b') = {p_b:.6}");
    Ok(())
}
