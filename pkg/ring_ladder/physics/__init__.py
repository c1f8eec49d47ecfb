# Model, closed-form solutions and analysis of the coupled-ring system.
