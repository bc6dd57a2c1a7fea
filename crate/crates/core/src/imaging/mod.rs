//! Period-sliced image representation and the target-period dictionary.

mod dictionary;
mod export;
mod image;

pub use dictionary::{build_period_dictionary, PeriodDictionary, DEFAULT_A_STEP_HZ, DEFAULT_B_REF_HZ};
pub use export::{read_image_csv, write_image_csv, write_image_pgm};
pub use image::{
    crop_width_for, flatten_image, max_slices, reshape_image, slice_and_stack,
    slice_and_stack_sparse, required_indices, Interp, PeriodImage, WidthConfig, DEFAULT_N_SLICES,
};
