use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::window_output_len;

/// Number of TEE views, and therefore the width of the penultimate layer.
pub const VIEW_CLASSES: usize = 10;
/// Name of the 10-unit fully-connected layer shared by both heads.
pub const VIEW_LAYER: &str = "fc_view";
/// Name of the 10 → 1 linear regression head.
pub const SCORE_LAYER: &str = "score";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arch {
    AlexnetMini,
    VggMini,
    AlexnetFull,
    VggFull,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::AlexnetMini, Arch::VggMini, Arch::AlexnetFull, Arch::VggFull];

    pub fn name(self) -> &'static str {
        match self {
            Arch::AlexnetMini => "alexnet-mini",
            Arch::VggMini => "vgg-mini",
            Arch::AlexnetFull => "alexnet-full",
            Arch::VggFull => "vgg-full",
        }
    }

    /// Native square input extent of the architecture.
    pub fn default_input(self) -> usize {
        match self {
            Arch::AlexnetMini | Arch::VggMini => 64,
            Arch::AlexnetFull => 227,
            Arch::VggFull => 224,
        }
    }

    /// Whether this is a full-size variant at its native input resolution.
    pub fn is_full(self) -> bool {
        matches!(self, Arch::AlexnetFull | Arch::VggFull)
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Arch::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown architecture {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    Conv {
        name: String,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Relu,
    MaxPool {
        kernel: usize,
        stride: usize,
    },
    Flatten,
    Linear {
        name: String,
        in_features: usize,
        out_features: usize,
    },
}

/// Architecture description: input geometry plus the layer sequence from the
/// image to the 10-unit view layer. The score head (10 → 1, identity
/// activation, reading the pre-softmax view activations) is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: Arch,
    pub input_height: usize,
    pub input_width: usize,
    pub channels: usize,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Extent {
    Spatial { c: usize, h: usize, w: usize },
    Flat(usize),
}

/// Appends layers while tracking the activation extent, so dimension
/// bookkeeping is done once, at build time.
struct Builder {
    layers: Vec<Layer>,
    extent: Extent,
    convs: usize,
    fcs: usize,
}

impl Builder {
    fn new(channels: usize, h: usize, w: usize) -> Self {
        Builder {
            layers: Vec::new(),
            extent: Extent::Spatial { c: channels, h, w },
            convs: 0,
            fcs: 0,
        }
    }

    fn conv(mut self, out: usize, kernel: usize, stride: usize, padding: usize) -> Result<Self> {
        self.convs += 1;
        let layer = Layer::Conv {
            name: format!("conv{}", self.convs),
            in_channels: match self.extent {
                Extent::Spatial { c, .. } => c,
                Extent::Flat(_) => 0,
            },
            out_channels: out,
            kernel,
            stride,
            padding,
        };
        self.push(layer)
    }

    fn relu(self) -> Result<Self> {
        self.push(Layer::Relu)
    }

    fn pool(self, kernel: usize, stride: usize) -> Result<Self> {
        self.push(Layer::MaxPool { kernel, stride })
    }

    fn fc(mut self, out: usize) -> Result<Self> {
        if matches!(self.extent, Extent::Spatial { .. }) {
            self = self.push(Layer::Flatten)?;
        }
        self.fcs += 1;
        let Extent::Flat(inputs) = self.extent else {
            unreachable!("flattened above")
        };
        let name = format!("fc{}", self.fcs);
        self.push(Layer::Linear {
            name,
            in_features: inputs,
            out_features: out,
        })
    }

    fn view_head(mut self) -> Result<Vec<Layer>> {
        self = self.fc(VIEW_CLASSES)?;
        if let Some(Layer::Linear { name, .. }) = self.layers.last_mut() {
            *name = VIEW_LAYER.to_string();
        }
        Ok(self.layers)
    }

    fn push(mut self, layer: Layer) -> Result<Self> {
        self.extent = propagate(self.extent, &layer)?;
        self.layers.push(layer);
        Ok(self)
    }
}

fn propagate(extent: Extent, layer: &Layer) -> Result<Extent> {
    match (extent, layer) {
        (
            Extent::Spatial { c, h, w },
            Layer::Conv {
                name,
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            },
        ) => {
            if *in_channels != c {
                return Err(Error::shape(
                    "build_model",
                    format!("{name}: expects {in_channels} channels, receives {c}"),
                ));
            }
            let collapse = || {
                Error::shape(
                    "build_model",
                    format!("{name}: {kernel}×{kernel} kernel does not fit {h}×{w} (padding {padding})"),
                )
            };
            Ok(Extent::Spatial {
                c: *out_channels,
                h: window_output_len(h, *kernel, *stride, *padding).ok_or_else(collapse)?,
                w: window_output_len(w, *kernel, *stride, *padding).ok_or_else(collapse)?,
            })
        }
        (Extent::Spatial { c, h, w }, Layer::MaxPool { kernel, stride }) => {
            let collapse = || {
                Error::shape(
                    "build_model",
                    format!("max-pool {kernel}×{kernel} collapses a {h}×{w} activation"),
                )
            };
            Ok(Extent::Spatial {
                c,
                h: window_output_len(h, *kernel, *stride, 0).ok_or_else(collapse)?,
                w: window_output_len(w, *kernel, *stride, 0).ok_or_else(collapse)?,
            })
        }
        (e, Layer::Relu) => Ok(e),
        (Extent::Spatial { c, h, w }, Layer::Flatten) => c
            .checked_mul(h)
            .and_then(|n| n.checked_mul(w))
            .map(Extent::Flat)
            .ok_or_else(|| Error::shape("build_model", "flattened size overflows")),
        (
            Extent::Flat(n),
            Layer::Linear {
                name,
                in_features,
                out_features,
            },
        ) => {
            if *in_features != n {
                return Err(Error::shape(
                    "build_model",
                    format!("{name}: expects {in_features} features, receives {n}"),
                ));
            }
            Ok(Extent::Flat(*out_features))
        }
        (e, l) => Err(Error::shape(
            "build_model",
            format!("layer {l:?} cannot follow activation {e:?}"),
        )),
    }
}

impl ModelSpec {
    /// Default layer stack of `arch` for a square `input` image.
    pub fn new(arch: Arch, input: usize, channels: usize) -> Result<Self> {
        let b = Builder::new(channels, input, input);
        let layers = match arch {
            Arch::AlexnetMini => b
                .conv(16, 5, 2, 0)?
                .relu()?
                .pool(2, 2)?
                .conv(32, 3, 1, 0)?
                .relu()?
                .pool(2, 2)?
                .conv(48, 3, 1, 0)?
                .relu()?
                .pool(2, 2)?
                .fc(128)?
                .relu()?
                .view_head()?,
            Arch::VggMini => {
                let mut b = b;
                for width in [16, 32, 64] {
                    b = b.conv(width, 3, 1, 0)?.relu()?.conv(width, 3, 1, 0)?.relu()?.pool(2, 2)?;
                }
                b.fc(128)?.relu()?.view_head()?
            }
            Arch::AlexnetFull => b
                .conv(96, 11, 4, 0)?
                .relu()?
                .pool(3, 2)?
                .conv(256, 5, 1, 2)?
                .relu()?
                .pool(3, 2)?
                .conv(384, 3, 1, 1)?
                .relu()?
                .conv(384, 3, 1, 1)?
                .relu()?
                .conv(256, 3, 1, 1)?
                .relu()?
                .pool(3, 2)?
                .fc(4096)?
                .relu()?
                .fc(4096)?
                .relu()?
                .view_head()?,
            Arch::VggFull => {
                let mut b = b;
                for (width, repeats) in [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)] {
                    for _ in 0..repeats {
                        b = b.conv(width, 3, 1, 1)?.relu()?;
                    }
                    b = b.pool(2, 2)?;
                }
                b.fc(4096)?.relu()?.fc(4096)?.relu()?.view_head()?
            }
        };
        let spec = ModelSpec {
            arch,
            input_height: input,
            input_width: input,
            channels,
            layers,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec at the architecture's native input size, single channel.
    pub fn default_for(arch: Arch) -> Result<Self> {
        ModelSpec::new(arch, arch.default_input(), 1)
    }

    /// Checks the layer chain end to end, including the fixed output stage.
    pub fn validate(&self) -> Result<()> {
        let zero_width = self.layers.iter().any(|l| match l {
            Layer::Conv { out_channels, .. } => *out_channels == 0,
            Layer::Linear { out_features, .. } => *out_features == 0,
            _ => false,
        });
        if self.channels == 0 || self.input_height == 0 || self.input_width == 0 || zero_width {
            return Err(Error::InvalidArgument("model sizes must be positive".into()));
        }
        let mut extent = Extent::Spatial {
            c: self.channels,
            h: self.input_height,
            w: self.input_width,
        };
        for layer in &self.layers {
            extent = propagate(extent, layer)?;
        }
        match self.layers.last() {
            Some(Layer::Linear {
                name,
                out_features: VIEW_CLASSES,
                ..
            }) if name == VIEW_LAYER => Ok(()),
            _ => Err(Error::InvalidArgument(format!(
                "last layer must be {VIEW_LAYER} with {VIEW_CLASSES} outputs"
            ))),
        }
    }

    pub fn score_head() -> Layer {
        Layer::Linear {
            name: SCORE_LAYER.to_string(),
            in_features: VIEW_CLASSES,
            out_features: 1,
        }
    }

    /// Conv and linear layers in order, followed by the score head.
    pub fn parametric_layers(&self) -> Vec<Layer> {
        self.layers
            .iter()
            .filter(|l| matches!(l, Layer::Conv { .. } | Layer::Linear { .. }))
            .cloned()
            .chain(std::iter::once(Self::score_head()))
            .collect()
    }

    /// Name and shape of every parameter tensor, in parameter-store order.
    pub fn param_shapes(&self) -> Result<Vec<(String, Vec<usize>)>> {
        self.validate()?;
        let mut shapes = Vec::new();
        for layer in &self.parametric_layers() {
            let (name, shape) = match layer {
                Layer::Conv {
                    name,
                    in_channels,
                    out_channels,
                    kernel,
                    ..
                } => (name, vec![*out_channels, *in_channels, *kernel, *kernel]),
                Layer::Linear {
                    name,
                    in_features,
                    out_features,
                } => (name, vec![*out_features, *in_features]),
                _ => unreachable!("parametric_layers yields conv and linear only"),
            };
            if shape.iter().try_fold(1usize, |n, &d| n.checked_mul(d)).is_none() {
                return Err(Error::shape("build_model", format!("{name}: weight size overflows")));
            }
            shapes.push((format!("{name}.bias"), shape[..1].to_vec()));
            shapes.insert(shapes.len() - 1, (format!("{name}.weight"), shape));
        }
        Ok(shapes)
    }

    /// Number of layers in the stack, the score head included.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mini_defaults_end_in_view_layer() {
        for arch in [Arch::AlexnetMini, Arch::VggMini] {
            let spec = ModelSpec::default_for(arch).unwrap();
            let Some(Layer::Linear { name, out_features, .. }) = spec.layers.last() else {
                panic!("no view layer");
            };
            assert_eq!(name, VIEW_LAYER);
            assert_eq!(*out_features, 10);
        }
    }

    #[test]
    fn vgg_is_deeper() {
        let a = ModelSpec::default_for(Arch::AlexnetMini).unwrap();
        let v = ModelSpec::default_for(Arch::VggMini).unwrap();
        assert!(v.depth() > a.depth());
    }

    #[test]
    fn full_variants_accept_their_native_sizes() {
        let a = ModelSpec::new(Arch::AlexnetFull, 227, 1).unwrap();
        let v = ModelSpec::new(Arch::VggFull, 224, 1).unwrap();
        let fc1_inputs = |s: &ModelSpec| {
            s.layers
                .iter()
                .find_map(|l| match l {
                    Layer::Linear { in_features, .. } => Some(*in_features),
                    _ => None,
                })
                .unwrap()
        };
        assert_eq!(fc1_inputs(&a), 256 * 6 * 6);
        assert_eq!(fc1_inputs(&v), 512 * 7 * 7);
    }

    #[test]
    fn spatial_collapse_is_a_build_error() {
        let err = ModelSpec::new(Arch::VggMini, 16, 1).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }), "{err}");
    }

    #[test]
    fn tampered_output_stage_fails_validation() {
        let mut spec = ModelSpec::default_for(Arch::AlexnetMini).unwrap();
        spec.layers.pop();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn arch_names_parse() {
        for a in Arch::ALL {
            assert_eq!(a.name().parse::<Arch>().unwrap(), a);
        }
        assert!("resnet".parse::<Arch>().is_err());
    }
}
