vitvs_config = {
    'app_config': {
        'service_name': 'vitvs',
        'setup_name': 'ViTVS',
        'log_dir_name': 'vitvs-log',
    }
}
