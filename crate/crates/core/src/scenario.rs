//! A fragment together with everything derived from it up to the program
//! matrix.

use crate::error::Result;
use crate::feasibility::{build_skeleton, DataScaling, NcProgram, ProgramSkeleton};
use crate::fragment::{DataTable, GptFragment};
use crate::identities::{effect_identities, state_identities, transformation_identities, IdentitySet};
use crate::polytope::{enumerate_vertices, measurement_polytope, source_polytope, VRep};

#[derive(Clone, Debug)]
pub struct Scenario {
    pub fragment: GptFragment,
    pub state_ids: IdentitySet,
    pub effect_ids: IdentitySet,
    pub t_ids: IdentitySet,
    /// measurement assignment vertices
    pub phi: VRep,
    /// source assignment vertices
    pub psi: VRep,
}

impl Scenario {
    pub fn new(fragment: GptFragment) -> Result<Scenario> {
        let state_ids = state_identities(&fragment)?;
        let effect_ids = effect_identities(&fragment)?;
        let t_ids = transformation_identities(&fragment)?;
        let phi = enumerate_vertices(&measurement_polytope(&fragment, &effect_ids)?)?;
        let psi = enumerate_vertices(&source_polytope(&fragment, &state_ids)?)?;
        Ok(Scenario {
            fragment,
            state_ids,
            effect_ids,
            t_ids,
            phi,
            psi,
        })
    }

    pub fn num_states(&self) -> usize {
        self.fragment.num_states()
    }

    pub fn skeleton(&self, scaling: DataScaling) -> Result<ProgramSkeleton> {
        build_skeleton(&self.phi, &self.psi, &self.t_ids, self.num_states(), scaling)
    }

    pub fn program(&self, data: &DataTable) -> Result<NcProgram> {
        self.skeleton(DataScaling::Original)?.with_data(data)
    }

    pub fn identity_sets(&self) -> [&IdentitySet; 3] {
        [&self.state_ids, &self.effect_ids, &self.t_ids]
    }
}
