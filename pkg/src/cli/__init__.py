"""Command-line front end for FSLCert."""
