//! Embedded copies of the preset scenario files committed under `presets/`.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig3-dynamics",
        description: "3 periodic cavities, one polariton in cavity 2; full model vs \
                      effective BH, single jump trajectory over 120 ns",
        text: include_str!("../../../presets/fig3-dynamics.toml"),
    },
    Preset {
        name: "fig4-transition",
        description: "4 periodic cavities at unit filling; driving ramped so \
                      kappa/J sweeps from the Mott regime into the superfluid regime",
        text: include_str!("../../../presets/fig4-transition.toml"),
    },
    Preset {
        name: "fig5-wstate",
        description: "effective BH with attractive kappa ramp; adiabatic W-state \
                      preparation on 4 cavities",
        text: include_str!("../../../presets/fig5-wstate.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
