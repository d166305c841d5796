# %%
"""Examples of using the yoloscenes code to look at the traffic-scene experiments."""

import matplotlib.pyplot as plt
import matplotlib.patches as patches
import numpy as np

from yoloscenes import embedded_dataset, figure6_report, figure6_dataset, experiment_report
from yoloscenes import SceneConfig, build_layout, project, encode, detect, GridConfig
from yoloscenes import GroundTruthObject, to_corner_form

# Load the recorded results
records = embedded_dataset()
print(f'{len(records)} trials, {sum(r.photos_taken for r in records)} photos')

# %% ##################################################################################
# Success rates of experiments 3 and 4 against camera distance

reports = figure6_report(records)
ds = figure6_dataset(reports)

fig, ax = plt.subplots()
width = 3.0
for i, e in enumerate(ds['experiment'].values):
    rates = ds['rate_pct'].sel(experiment=e)
    ax.bar(ds['distance_ft'].values + (i - 0.5)*width, rates, width=width,
           label=f'Experiment {e}')
ax.set_xlabel('Camera distance [ft]')
ax.set_ylabel('Success rate [%]')
ax.set_ylim(0, 100)
ax.legend(frameon=False)
plt.show()

for r in reports:
    print(*r.notes, sep='\n')

# %% ##################################################################################
# Success rates of the single-object experiments

for e in (1, 2):
    r = experiment_report(records, e)
    plt.plot([row.distance_ft for row in r.rows], [row.rate_pct for row in r.rows],
             marker='o', label=f'Experiment {e}')
plt.xlabel('Camera distance [ft]')
plt.ylabel('Success rate [%]')
plt.legend(frameon=False)
plt.show()

# %% ##################################################################################
# Projected boxes of one experiment 3 trial, and what detect() recovers from them

category = {'car': 6, 'person': 14}
d = 40
scene = SceneConfig(d)
trial = build_layout(3).at_distance(d)[4]  # car Left, person Middle 10 ft ahead

boxes = {o.kind: project(o, scene) for o in trial.objects}
truth = [GroundTruthObject(box, category[kind]) for kind, box in boxes.items()]
detections = detect(encode(truth, GridConfig()))

fig, ax = plt.subplots()
for kind, box in boxes.items():
    left, top, right, bottom = to_corner_form(box)
    ax.add_patch(patches.Rectangle((left, top), right-left, bottom-top, fill=False,
                                   label=kind, color='C0' if kind == 'car' else 'C1'))
for s in np.arange(1, 7)/7:
    ax.axhline(s, color=[.8, .8, .8], lw=0.5)
    ax.axvline(s, color=[.8, .8, .8], lw=0.5)
ax.set_xlim(0, 1)
ax.set_ylim(1, 0)
ax.set_aspect(1/scene.image_aspect)
ax.legend(frameon=False)
ax.set_title(f'Experiment 3 at {d} ft: {len(detections)} detections')
plt.show()

# %%
