"""FSLCert - fictitious space certificates for additive Schwarz preconditioners."""
