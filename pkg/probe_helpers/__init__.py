# probe_helpers package
# Contains engine configuration and user-facing text content
