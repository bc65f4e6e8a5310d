use attrmean::moments::Formulation;
use attrmean::{builtin, moments, optimum_spec, DesignConstants, Phase};

fn main() -> attrmean::Result<()> {
    let pop = builtin(Phase::Single, 1)?.summary;
    let dc = DesignConstants::default();
    let spec = optimum_spec(&pop, &dc, Phase::Single, Formulation::Rederived)?;
    let m = moments::report_for(&spec, &pop, Formulation::Rederived)?;
    println!("bias {:.2e}  PRE {:.2}", m.bias, m.pre);
    Ok(())
}
