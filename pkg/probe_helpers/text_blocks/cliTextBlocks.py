# Text shown by the command line front end and by the spec checker
# =======================================================================
# =======================================================================

cliDescription = 'Evaluate probe-framework spec files: declare boundary spaces, atoms, regions, \
probes and boundary conditions, then compute values, conditional probabilities and expectation values.'

runCommandHelp = 'Parse, evaluate and print every query (or only those named with --query).'
checkCommandHelp = 'Parse and validate a spec file without evaluating it.'

specFileHelp = 'Path to a spec file (UTF-8 text, ".pf" by convention).'
queryFlagHelp = 'Only evaluate the named query. May be given several times.'
formatFlagHelp = 'Output format: "text" (one line per query) or "json" (array of records).'
toleranceFlagHelp = 'Tolerance for cone membership, probe order and quotient bounds (default %(default)s).'
jobsFlagHelp = 'Evaluate queries on this many worker threads. Output order never changes.'
saveCsvFlagHelp = 'Also write the result records to this CSV file.'
logDirFlagHelp = 'Write per-query event timestamps (CSV) into this directory.'
transcriptFlagHelp = 'Save everything printed to the console into this file.'

# Diagnostic templates
# =======================================================================

missingFileText = 'spec file not found: {path}'
unreadableFileText = 'could not read spec file {path}: {reason}'
unknownQueryText = 'unknown query: {name}'
checkPassedText = '{path}: OK ({count} declarations)'
diagnosticLineText = '{path}:{line}:{column}: {severity}: {message}'

# Text-format result lines: NAME: quotient (num/den)
resultLineText = '{name}: {quotient} ({numerator}/{denominator})'
errorLineText = '{name}: ERROR {error}'
