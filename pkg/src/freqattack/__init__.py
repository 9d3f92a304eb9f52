"""Query-efficient black-box adversarial attacks on image-to-image
reconstruction victims, parameterized in the low-frequency block-DCT
domain."""

from .dct import (DctBasis, block_dct, dct_matrix, freq_grad_to_spatial,
                  pad_low_freq, perturbed_idct)
from .errors import (ConfigError, DimensionError, FreqAttackError,
                     RankCountError, RemoteError, ShapeMismatch, Unsupported,
                     ViewCountMismatch, WindowError)
from .images import (BlockGrid, assemble_blocks, clamp_pixels, linf_project,
                     load_fimg, load_png, luminance, mse, partition_blocks,
                     psnr, save_fimg, save_png, ssim)
from .losses import LossConfig, adv_loss, adv_loss_grad, perceptual_proxy
from .victims import (BlackVictim, BlurVictim, IdentityVictim, QueryLedger,
                      ToySplatVictim, Victim, make_victim, toy_splat_render)
from .attacks.pgd import PgdConfig, pgd_attack
from .attacks.nes import NesConfig, nes_gradient, nes_pgd_attack
from .attacks.cmaes import (CmaConfig, CmaState, cma_evaluate_and_rank,
                            cma_init, cma_maximize, cma_sample, cma_update,
                            cmaes_attack)
from .attacks.report import AttackReport
from .attacks.rng import CounterRng
from .protocol import RemoteVictim

__all__ = [name for name in dir() if not name.startswith("_")]
