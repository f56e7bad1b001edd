# text-blocks package
# Contains text content for the command line and diagnostics
