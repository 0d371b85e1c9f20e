//! Published parameter rows (tau = 0.2, xi = 2 throughout).

use super::{Model, ModelParams};

/// Named parameter profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Boat,
    Texture,
    Baboon,
    Peppers,
    Bsd68,
}

impl Profile {
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "boat" => Some(Profile::Boat),
            "texture" => Some(Profile::Texture),
            "baboon" | "mandrill" => Some(Profile::Baboon),
            "peppers" | "pepper" => Some(Profile::Peppers),
            "bsd68" => Some(Profile::Bsd68),
            _ => None,
        }
    }
}

fn look_row(looks: u32) -> Option<usize> {
    match looks {
        1 => Some(0),
        3 => Some(1),
        5 => Some(2),
        10 => Some(3),
        _ => None,
    }
}

fn shan(alpha: f64, beta: f64) -> ModelParams {
    ModelParams {
        alpha,
        nu: beta,
        gamma: 0.0,
        lambda: 0.0,
        ..ModelParams::default()
    }
}

fn tdm(gamma: f64, alpha: f64, k: f64) -> ModelParams {
    ModelParams {
        gamma,
        alpha,
        k,
        lambda: 0.0,
        ..ModelParams::default()
    }
}

fn proposed(gamma: f64, alpha: f64, k: f64, lambda: f64) -> ModelParams {
    ModelParams {
        gamma,
        alpha,
        k,
        lambda,
        ..ModelParams::default()
    }
}

/// Parameters of `model` on `profile` at `looks` (1, 3, 5 or 10). The BSD68
/// profile is look-independent.
pub fn params_for(profile: Profile, model: Model, looks: u32) -> Option<ModelParams> {
    if profile == Profile::Bsd68 {
        return Some(match model {
            Model::Shan => shan(0.1, 1.0),
            Model::Tdm => tdm(5.0, 1.0, 2.0),
            Model::Proposed => proposed(5.0, 2.0, 2.0, 0.08),
        });
    }
    let i = look_row(looks)?;
    Some(match (profile, model) {
        (Profile::Boat, Model::Shan) => shan([1.0, 1.1, 1.1, 1.2][i], 1.0),
        (Profile::Boat, Model::Tdm) => tdm(5.0, [2.0, 2.5, 2.5, 2.0][i], 2.0),
        (Profile::Boat, Model::Proposed) => proposed(4.0, [1.0, 1.0, 1.0, 3.0][i], 2.0, 0.03),

        (Profile::Texture, Model::Shan) => shan([0.01, 0.1, 0.1, 0.4][i], 0.01),
        (Profile::Texture, Model::Tdm) => {
            tdm([4.0, 4.0, 2.0, 2.0][i], [0.1, 1.0, 1.0, 1.0][i], 2.0)
        }
        (Profile::Texture, Model::Proposed) => proposed(
            4.0,
            [0.4, 1.0, 0.5, 0.5][i],
            2.0,
            [0.03, 0.03, 0.03, 0.05][i],
        ),

        (Profile::Baboon, Model::Shan) => shan([1.0, 1.0, 1.1, 1.2][i], 1.0),
        (Profile::Baboon, Model::Tdm) => tdm([9.0, 5.0, 5.0, 5.0][i], [2.5, 3.0, 3.1, 3.1][i], 2.0),
        (Profile::Baboon, Model::Proposed) => proposed(5.0, [1.0, 1.1, 1.2, 1.2][i], 2.0, 0.1),

        (Profile::Peppers, Model::Shan) => shan([1.0, 1.0, 1.1, 1.2][i], 1.0),
        (Profile::Peppers, Model::Tdm) => {
            tdm([5.0, 9.0, 9.0, 9.0][i], [2.0, 2.1, 2.5, 2.5][i], 2.0)
        }
        (Profile::Peppers, Model::Proposed) => {
            proposed(5.0, [1.0, 1.0, 1.0, 2.0][i], 2.0, [0.1, 0.1, 0.1, 0.08][i])
        }
        (Profile::Bsd68, _) => unreachable!(),
    })
}

/// Proposed-model settings used on the two real SAR scenes (`k = 4`).
pub fn sar_scene(index: usize) -> Option<ModelParams> {
    match index {
        1 => Some(proposed(5.0, 0.1, 4.0, 0.007)),
        2 => Some(proposed(2.0, 0.1, 4.0, 0.001)),
        _ => None,
    }
}
