"""Regular dextrous workspace of 3R orthogonal manipulators."""
