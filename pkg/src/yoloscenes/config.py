"""Command-line configuration read from a flat TOML file."""

from dataclasses import dataclass, field, fields
from pathlib import Path
from .gridcodec import GridConfig
from .postprocess import PostprocessConfig
from .scenegen import SceneConfig, ObjectSizes
from .utils import split_dict, present_and_in

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

OUTPUT_FORMATS = ('csv', 'json')
SCENE_KEYS = ('focal_scale', 'image_aspect', 'lane_spacing_ft', 'camera_height_ft')
SIZE_KEYS = tuple(f.name for f in fields(ObjectSizes))
GRID_KEYS = ('S', 'B', 'C')
THRESHOLD_KEYS = tuple(f.name for f in fields(PostprocessConfig))
OUTPUT_KEYS = ('output_format', 'output_path')


@dataclass(frozen=True)
class CliConfig:
    """Settings shared by the command-line commands.

    Attributes
    ----------
    output_format :
        `csv` or `json`.
    output_path :
        File to write to, or `None` for standard output.
    scene :
        [SceneConfig][yoloscenes.scenegen.SceneConfig] arguments other than the camera distance.
    sizes :
        Physical object sizes.
    grid :
        Detector grid shape used by the synthetic pipeline.
    thresholds :
        Score and NMS thresholds used by the synthetic pipeline.
    """

    output_format: str = 'csv'
    output_path: Path | None = None
    scene: dict = field(default_factory=dict)
    sizes: ObjectSizes = ObjectSizes()
    grid: GridConfig = GridConfig()
    thresholds: PostprocessConfig = PostprocessConfig()

    def __post_init__(self):
        present_and_in(vars(self), ['output_format'], OUTPUT_FORMATS)
        SceneConfig(40.0, **self.scene)  # fail early on bad scene constants

    def scene_config(self, camera_distance_ft: float) -> SceneConfig:
        """The camera set-up at a given camera distance."""
        return SceneConfig(camera_distance_ft, **self.scene)

    @classmethod
    def from_mapping(cls, values: dict):
        """Create a configuration from flat key/value pairs.

        Parameters
        ----------
        values :
            Any of the keys `output_format`, `output_path`, `focal_scale`, `image_aspect`,
            `lane_spacing_ft`, `camera_height_ft`, `person_width_ft`, `person_height_ft`,
            `car_length_ft`, `car_height_ft`, `S`, `B`, `C`, `score_threshold`, and
            `nms_iou_threshold`. Missing keys take their default values.

        Raises
        ------
        KeyError
            If there are unknown keys.
        ValueError
            If a value is a table or is invalid.
        """
        nested = [k for k, v in values.items() if isinstance(v, dict)]
        if nested:
            raise ValueError(f'Configuration must be flat; {", ".join(nested)} is a table.')

        rest, scene = split_dict(values, SCENE_KEYS)
        rest, sizes = split_dict(rest, SIZE_KEYS)
        rest, grid = split_dict(rest, GRID_KEYS)
        rest, thresholds = split_dict(rest, THRESHOLD_KEYS)
        unknown, output = split_dict(rest, OUTPUT_KEYS)
        if unknown:
            raise KeyError(f'Unknown configuration keys: {", ".join(sorted(unknown))}.')

        path = output.get('output_path')
        return cls(output.get('output_format', 'csv'), Path(path) if path else None, scene,
                   ObjectSizes(**sizes), GridConfig(**grid), PostprocessConfig(**thresholds))


def load_config(path: str | Path | None = None) -> CliConfig:
    """Read a configuration file.

    Parameters
    ----------
    path :
        A flat TOML file. If `None`, the default configuration is returned.

    Returns
    -------
    :
        The configuration.

    Raises
    ------
    SyntaxError
        If the file is not valid TOML.
    KeyError
        If the file has unknown keys.
    ValueError
        If the file has nested tables or invalid values.
    """
    if path is None:
        return CliConfig()

    path = Path(path)
    with open(path, 'rb') as f:
        try:
            values = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise SyntaxError(f'Error while parsing file "{path.name}"') from e

    return CliConfig.from_mapping(values)
