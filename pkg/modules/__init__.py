# GraphEcho: topology of metric graphs from their spectra
