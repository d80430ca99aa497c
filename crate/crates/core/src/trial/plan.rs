use alloc::vec::Vec;

use rand::Rng;

use super::{Phase, StudyPlan, Technique, TrialSpec};
use crate::rng;
use crate::scene::{palette_for, PerplexityLevel, TargetCount};

/// Counterbalancing orders, one per participant slot.
pub const ORDER_COUNT: u32 = 24;
/// Search/repeat sets per (technique, perplexity, num_targets) cell.
pub const SETS_PER_CONDITION: u8 = 3;
/// 2 techniques x 3 perplexities x 3 target counts x 3 sets x 2 phases.
pub const PLAN_LENGTH: usize = 108;

const STREAM_PLAN: u64 = 0x9A11;
const STREAM_SCENE: u64 = 0x5CE7;
const STREAM_PAIRS: u64 = 0x9A15;

/// Balanced 3x3 Latin square and its mirror: six perplexity orders, each
/// level first, second and third exactly twice, and every ordered pair of
/// adjacent levels occurring equally often.
const PERPLEXITY_ORDERS: [[PerplexityLevel; 3]; 6] = {
    use PerplexityLevel::*;
    [
        [Low, Medium, High],
        [Medium, High, Low],
        [High, Low, Medium],
        [High, Medium, Low],
        [Low, High, Medium],
        [Medium, Low, High],
    ]
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("order index {0} out of range 0..{ORDER_COUNT}")]
    OrderIndexOutOfRange(u32),
}

/// Builds one participant's 108-trial plan.
///
/// Technique order alternates with the parity of `order_index`; the
/// perplexity order is row `order_index % 6` of a balanced Latin square and is
/// shared by both technique blocks; target counts run 1, 2, 4. Each
/// (technique, perplexity) block uses one scene seed, so distractors stay put
/// while targets change between sets. Each set's target pair is drawn without
/// replacement from the 16 palette pairs, and its repeat trial copies the
/// search trial's seed and pair.
pub fn build_plan(participant: u32, order_index: u32) -> Result<StudyPlan, PlanError> {
    if order_index >= ORDER_COUNT {
        return Err(PlanError::OrderIndexOutOfRange(order_index));
    }
    let plan_seed = rng::derive_seed(u64::from(participant), &[STREAM_PLAN, u64::from(order_index)]);
    let techniques = if order_index.is_multiple_of(2) {
        [Technique::AssistVR, Technique::DiscPIM]
    } else {
        [Technique::DiscPIM, Technique::AssistVR]
    };
    let perplexities = PERPLEXITY_ORDERS[(order_index % 6) as usize];

    let mut specs = Vec::with_capacity(super::PLAN_LENGTH);
    for technique in techniques {
        for perplexity in perplexities {
            let cell = [technique as u64, perplexity.index() as u64];
            let scene_seed = rng::derive_seed(plan_seed, &[STREAM_SCENE, cell[0], cell[1]]);
            let pairs = palette_for(perplexity).pairs();
            for num_targets in TargetCount::ALL {
                let mut stream = rng::stream(
                    plan_seed,
                    &[STREAM_PAIRS, cell[0], cell[1], num_targets.count() as u64],
                );
                // Partial Fisher-Yates over the 16 pair indices.
                let mut pool: [usize; 16] = core::array::from_fn(|i| i);
                for set in 0..SETS_PER_CONDITION {
                    let k = set as usize;
                    let j = stream.random_range(k..16);
                    pool.swap(k, j);
                    let target_pair = pairs[pool[k]];
                    for phase in [Phase::Search, Phase::Repeat] {
                        specs.push(TrialSpec {
                            participant,
                            technique,
                            perplexity,
                            num_targets,
                            set_index: set + 1,
                            phase,
                            scene_seed,
                            target_pair,
                        });
                    }
                }
            }
        }
    }
    debug_assert_eq!(specs.len(), PLAN_LENGTH);
    Ok(StudyPlan {
        participant,
        order_index,
        specs,
    })
}
