"""Geometry of the four traffic-scene experiments and pinhole projection of their objects.

Positions are described by a lane (Left, Middle, or Right, as seen from the camera) and an offset
in feet from the baseline towards the camera. The camera looks along the Middle lane and the
baseline is `camera_distance_ft` away from it.
"""

from dataclasses import dataclass, field
from typing import Literal
import warnings
from .geometry import BoundingBox, iou, clip_to_image
from .utils import present_and_positive, present_and_in, BehindCameraError, OutOfFrameError

Lane = Literal['Left', 'Middle', 'Right']
Kind = Literal['person', 'car']

LANES: tuple[Lane, ...] = ('Left', 'Middle', 'Right')
KINDS: tuple[Kind, ...] = ('person', 'car')
MATRIX_OFFSETS = (0, 10, 20)
"""Offsets [ft] of the rows of the 3 × 3 position matrix, measured from the baseline."""

EXPERIMENT_DISTANCES = {1: (10, 20, 30, 40, 50, 60),
                        2: (10, 20, 30, 40, 50, 60),
                        3: (40, 50, 60),
                        4: (40, 50, 60)}
"""Camera distances [ft] used in each experiment."""

EXPERIMENT_NAMES = {1: 'single person', 2: 'single car',
                    3: 'front person, rear car', 4: 'front car, rear person'}

PHOTOS_PER_TRIAL = 3

_LANE_SIGN = {'Left': -1, 'Middle': 0, 'Right': 1}


@dataclass(frozen=True)
class SceneConfig:
    """Camera set-up for one camera distance.

    Attributes
    ----------
    camera_distance_ft :
        Distance from the camera to the baseline [ft].
    focal_scale :
        Dimensionless pinhole constant: an object of height H [ft] at distance d [ft] appears
        `focal_scale`·H/d image heights tall. If `None`, a value is chosen so that the span
        between the Left and Right baseline positions at 40 ft covers 90% of the image width.
        With that value Left and Right objects 10 or 20 ft in front of the baseline are out of
        frame at 40 ft; a focal scale of 0.38 or less keeps every layout position in frame.
    image_aspect :
        Image width divided by image height.
    lane_spacing_ft :
        Lateral spacing between adjacent lanes [ft].
    camera_height_ft :
        Height of the camera above the ground [ft]. The horizon is at the image mid-line.
    """

    camera_distance_ft: float
    focal_scale: float | None = None
    image_aspect: float = 4/3
    lane_spacing_ft: float = 10.0
    camera_height_ft: float = 4.0

    def __post_init__(self):
        present_and_positive(vars(self), ['image_aspect', 'lane_spacing_ft'])
        if self.focal_scale is None:
            # 2 lane spacings across 0.9 image widths at 40 ft
            object.__setattr__(self, 'focal_scale',
                               0.9 * 40.0 * self.image_aspect / (2 * self.lane_spacing_ft))
        present_and_positive(vars(self), ['camera_distance_ft', 'focal_scale'])
        present_and_positive(vars(self), ['camera_height_ft'], allow_zero=True)


@dataclass(frozen=True)
class ObjectSizes:
    """Physical extents of the scene objects [ft]. Cars are seen broadside."""

    person_width_ft: float = 1.8
    person_height_ft: float = 5.7
    car_length_ft: float = 15.0
    car_height_ft: float = 4.8

    def __post_init__(self):
        present_and_positive(vars(self), list(vars(self)))


@dataclass(frozen=True)
class SceneObject:
    """A person or car placed in a scene.

    Attributes
    ----------
    kind :
        `person` or `car`.
    lane :
        `Left`, `Middle`, or `Right`.
    offset_ft :
        Distance in front of the baseline towards the camera [ft]; one of 0, 10, or 20.
    world_width_ft :
        Physical width as seen by the camera [ft].
    world_height_ft :
        Physical height [ft].
    """

    kind: Kind
    lane: Lane
    offset_ft: float
    world_width_ft: float
    world_height_ft: float

    def __post_init__(self):
        present_and_in(vars(self), ['kind'], KINDS)
        present_and_in(vars(self), ['lane'], LANES)
        present_and_in(vars(self), ['offset_ft'], MATRIX_OFFSETS)
        present_and_positive(vars(self), ['world_width_ft', 'world_height_ft'])


def make_object(kind: Kind, lane: Lane, offset_ft: float = 0,
                sizes: ObjectSizes = ObjectSizes()) -> SceneObject:
    """Create a person or car with the physical extents given in `sizes`."""
    if kind == 'car':
        return SceneObject(kind, lane, offset_ft, sizes.car_length_ft, sizes.car_height_ft)
    return SceneObject(kind, lane, offset_ft, sizes.person_width_ft, sizes.person_height_ft)


@dataclass(frozen=True)
class Trial:
    """One placement of the objects at one camera distance."""

    camera_distance_ft: float
    objects: tuple[SceneObject, ...]

    def find(self, kind: Kind) -> SceneObject | None:
        """The object of the given kind, or `None` if there isn't one."""
        return next((o for o in self.objects if o.kind == kind), None)


@dataclass(frozen=True)
class ExperimentLayout:
    """All trials of one experiment.

    Attributes
    ----------
    experiment_id :
        1, 2, 3, or 4.
    trials :
        The trials, ordered by camera distance, then baseline object lane, then matrix position
        (row-major: offset, then lane).
    """

    experiment_id: int
    trials: tuple[Trial, ...] = field(repr=False)

    @property
    def photo_count(self) -> int:
        """Number of photos taken (three per trial)."""
        return PHOTOS_PER_TRIAL * len(self.trials)

    def at_distance(self, camera_distance_ft: float) -> list[Trial]:
        """The trials at one camera distance."""
        return [t for t in self.trials if t.camera_distance_ft == camera_distance_ft]


def build_layout(experiment_id: int, sizes: ObjectSizes = ObjectSizes()) -> ExperimentLayout:
    """Enumerate the trials of an experiment.

    Parameters
    ----------
    experiment_id :
        The experiment:

        1. a single person in each lane on the baseline (only the Middle lane at 10 ft),
        2. a single car in each lane on the baseline,
        3. a car on the baseline and a person anywhere in the position matrix,
        4. a person on the baseline and a car in the position matrix, except in the person's
           lane where it would block the person.
    sizes :
        Physical extents of the objects.

    Returns
    -------
    :
        The experiment layout.

    Raises
    ------
    ValueError
        If `experiment_id` is not 1, 2, 3, or 4.
    """
    if experiment_id not in EXPERIMENT_DISTANCES:
        raise ValueError(f'Unknown experiment {experiment_id}; experiments are 1 to 4.')

    matrix = [(offset, lane) for offset in MATRIX_OFFSETS for lane in LANES]
    trials = []
    for d in EXPERIMENT_DISTANCES[experiment_id]:
        match experiment_id:
            case 1:
                lanes = ('Middle',) if d == 10 else LANES
                trials += [Trial(d, (make_object('person', lane, 0, sizes),)) for lane in lanes]
            case 2:
                trials += [Trial(d, (make_object('car', lane, 0, sizes),)) for lane in LANES]
            case 3:
                trials += [Trial(d, (make_object('car', car_lane, 0, sizes),
                                     make_object('person', lane, offset, sizes)))
                           for car_lane in LANES for offset, lane in matrix]
            case 4:
                trials += [Trial(d, (make_object('car', lane, offset, sizes),
                                     make_object('person', person_lane, 0, sizes)))
                           for person_lane in LANES for offset, lane in matrix
                           if lane != person_lane]

    return ExperimentLayout(experiment_id, tuple(trials))


def project(obj: SceneObject, scene: SceneConfig) -> BoundingBox:
    """Project an object through a pinhole camera into a normalised image box.

    Parameters
    ----------
    obj :
        The object.
    scene :
        The camera set-up.

    Returns
    -------
    :
        The object's box, clipped to the image.

    Raises
    ------
    BehindCameraError
        If the object is at or behind the camera.

    Notes
    -----
    With effective distance d = `camera_distance_ft` − `offset_ft` and focal scale f:

    - height = f·H/d and width = f·W/(d·aspect),
    - the centre abscissa is 0.5 + f·X/(d·aspect) where X is the lateral lane position,
    - the centre ordinate is 0.5 + f·(camera height − H/2)/d (objects stand on the ground).

    The box is then clipped to [0, 1]². An object entirely out of frame gives a zero-area box
    on the image border and a warning.
    """
    d = scene.camera_distance_ft - obj.offset_ft
    if d <= 0:
        raise BehindCameraError(f'A {obj.kind} {obj.offset_ft} ft in front of a baseline '
                                f'{scene.camera_distance_ft} ft away is not in front of the '
                                'camera.')

    f, aspect = scene.focal_scale, scene.image_aspect
    x = 0.5 + f * _LANE_SIGN[obj.lane] * scene.lane_spacing_ft / (d * aspect)
    y = 0.5 + f * (scene.camera_height_ft - obj.world_height_ft/2) / d
    w = f * obj.world_width_ft / (d * aspect)
    h = f * obj.world_height_ft / d

    if 0.0 <= x - w/2 and x + w/2 <= 1.0 and 0.0 <= y - h/2 and y + h/2 <= 1.0:
        return BoundingBox(x, y, w, h)

    box = clip_to_image(x, y, w, h)
    if box.area == 0.0:
        warnings.warn(f'The {obj.lane} {obj.kind} at {obj.offset_ft} ft is entirely out of frame '
                      f'at a camera distance of {scene.camera_distance_ft} ft.')
    return box


def in_frame(obj: SceneObject, scene: SceneConfig) -> bool:
    """Whether any part of an object projects into the image."""
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        return project(obj, scene).area > 0.0


def overlap_flag(a: SceneObject, b: SceneObject, scene: SceneConfig) -> bool:
    """Whether two objects overlap in the image (their projected boxes have a positive IOU).

    Raises
    ------
    OutOfFrameError
        If either object projects entirely outside the image, where overlap is undefined.
    BehindCameraError
        If either object is at or behind the camera.
    """
    for obj in (a, b):
        if not in_frame(obj, scene):
            raise OutOfFrameError(f'The {obj.lane} {obj.kind} at {obj.offset_ft} ft is entirely '
                                  f'out of frame at a camera distance of '
                                  f'{scene.camera_distance_ft} ft.')
    return iou(project(a, scene), project(b, scene)) > 0.0
