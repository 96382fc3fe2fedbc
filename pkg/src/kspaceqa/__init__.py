"""k-space artifact synthesis and MR image-quality classifiers."""

__version__ = "0.1.0"

from .artifacts import (ALIASING, CARDIAC, CLASS_NAMES, CLEAN, GIBBS,
                        N_CLASSES, RESPIRATORY, AliasingParams, CardiacParams,
                        GibbsParams, LabeledSample, RespiratoryParams,
                        SeverityRecord, build_dataset, corrupt_aliasing,
                        corrupt_cardiac, corrupt_gibbs, corrupt_respiratory,
                        sample_severity)
from .models import (FrequencyModelConfig, Model, SpatialModelConfig,
                     build_frequency_model, build_spatial_model, predict)
from .numerics import circ_shift, conv2d_circular, dft2, idft2
from .phantom import Ellipse, PhantomSpec, generate_phantom, make_corpus
from .training import (ArrayDataset, TrainConfig, TrainHistory,
                       cross_validate, dataset_from_samples, evaluate,
                       split_by_group, train_dann, train_supervised)
